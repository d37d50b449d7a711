use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Atom(String),
    Var(String),
    Wildcard,
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    NotEq,
    /// Anything the grammar has no use for; carries the offending text.
    Bad(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: l0, col: c0 });

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                bump!();
            }
            if i < chars.len() {
                bump!();
                bump!();
            } else {
                push(&mut out, Tok::Bad("/*".into()));
            }
            continue;
        }
        let negative = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            let mut text = String::new();
            if negative {
                text.push('-');
                bump!();
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                text.push(chars[i]);
                bump!();
            }
            let tok = text.parse::<i64>().map_or_else(|_| Tok::Bad(text), Tok::Int);
            push(&mut out, tok);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut text = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                text.push(chars[i]);
                bump!();
            }
            let tok = if text.starts_with('_') {
                Tok::Wildcard
            } else if text.starts_with(|ch: char| ch.is_uppercase()) {
                Tok::Var(text)
            } else if text.starts_with(|ch: char| ch.is_lowercase()) {
                Tok::Atom(text)
            } else {
                Tok::Bad(text)
            };
            push(&mut out, tok);
            continue;
        }
        if c == '\\' && chars.get(i + 1) == Some(&'=') {
            bump!();
            bump!();
            push(&mut out, Tok::NotEq);
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' if chars.get(i + 1) == Some(&'-') => {
                bump!();
                Tok::Bad(":-".into())
            }
            other => Tok::Bad(other.into()),
        };
        bump!();
        push(&mut out, tok);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("pos(1,-2). % c\n_X \\= Y"),
            [
                Tok::Atom("pos".into()),
                Tok::LParen,
                Tok::Int(1),
                Tok::Comma,
                Tok::Int(-2),
                Tok::RParen,
                Tok::Dot,
                Tok::Wildcard,
                Tok::NotEq,
                Tok::Var("Y".into()),
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a.\n  b.");
        assert_eq!((t[2].line, t[2].col), (2, 3));
    }

    #[test]
    fn overflow_is_bad_token() {
        assert!(matches!(toks("99999999999999999999")[0], Tok::Bad(_)));
    }
}
