//! Random parser inputs: token soup, raw bytes and damaged fixture text.

use rand::rngs::StdRng;
use rand::Rng;

const ALPHABET: &[&str] = &[
    "action", "ll_action", "mapping", "init_state", "goal_state", "resources", "duration", "(", ")", "[",
    "]", ",", ".", "X", "Y", "_", "a1", "b2", "pos", "add", "del", "\\=", "1", "-3", "%", "\n", " ", "'q x'",
    "|", ":-", "\"", "0x", "é",
];

fn mutate(rng: &mut StdRng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..8) {
        if chars.is_empty() {
            break;
        }
        let i = rng.gen_range(0..chars.len());
        match rng.gen_range(0..3) {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, *b"().,[]_X\\=%".get(rng.gen_range(0..11)).unwrap() as char),
            _ => chars.truncate(i),
        }
    }
    chars.into_iter().collect()
}

/// Input `i` of a fuzz run over `corpus`.
pub fn fuzz_input(rng: &mut StdRng, corpus: &[String], i: usize) -> String {
    match i % 3 {
        0 => (0..rng.gen_range(0..40)).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect(),
        1 => {
            let bytes: Vec<u8> = (0..rng.gen_range(0..64)).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        _ => {
            let k = rng.gen_range(0..corpus.len());
            mutate(rng, &corpus[k])
        }
    }
}
