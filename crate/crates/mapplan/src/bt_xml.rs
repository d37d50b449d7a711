//! Behaviour-tree XML in the BehaviorTree.CPP layout.
//!
//! Action leaves are elements named after the action, with the leaf id in
//! `name` and one attribute per parameter. Joins are `<WaitFor>` condition
//! elements listing the awaited leaf ids, separated by `;`. Parallel nodes
//! succeed only when every child does.

use std::fmt::Write;

use mapplan_core::bt::{ActionLeaf, BtNode};

pub const TREE_ID: &str = "MainTree";
const ALL_CHILDREN: &str = r#"success_count="-1" failure_count="1""#;

#[derive(Debug, thiserror::Error)]
pub enum XmlError {
    #[error("malformed XML: {0}")]
    Syntax(#[from] roxmltree::Error),
    #[error("unexpected tree layout: {0}")]
    Layout(String),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            // Parsers normalise raw whitespace in attribute values.
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn emit_xml(root: &BtNode) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<root BTCPP_format=\"4\" main_tree_to_execute=\"{TREE_ID}\">");
    let _ = writeln!(out, "  <BehaviorTree ID=\"{TREE_ID}\">");
    node(root, 2, &mut out);
    out.push_str("  </BehaviorTree>\n</root>\n");
    out
}

fn node(n: &BtNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match n {
        BtNode::Sequence(c) | BtNode::Parallel(c) => {
            let open = match n {
                BtNode::Sequence(_) => "Sequence".to_string(),
                _ => format!("Parallel {ALL_CHILDREN}"),
            };
            let tag = open.split(' ').next().unwrap_or_default();
            if c.is_empty() {
                let _ = writeln!(out, "{pad}<{open}/>");
                return;
            }
            let _ = writeln!(out, "{pad}<{open}>");
            for x in c {
                node(x, depth + 1, out);
            }
            let _ = writeln!(out, "{pad}</{tag}>");
        }
        BtNode::Action(leaf) => {
            let _ = write!(out, "{pad}<{} name=\"{}\"", leaf.name, escape(&leaf.id));
            for (k, v) in &leaf.params {
                let _ = write!(out, " {k}=\"{}\"", escape(v));
            }
            out.push_str("/>\n");
        }
        BtNode::WaitFor(ids) => {
            let _ = writeln!(out, "{pad}<WaitFor actions=\"{}\"/>", escape(&ids.join(";")));
        }
    }
}

pub fn parse_xml(text: &str) -> Result<BtNode, XmlError> {
    let doc = roxmltree::Document::parse(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "root" {
        return Err(XmlError::Layout("document element is not <root>".into()));
    }
    let main = root.attribute("main_tree_to_execute").unwrap_or(TREE_ID);
    let tree = root
        .children()
        .filter(|c| c.is_element() && c.tag_name().name() == "BehaviorTree")
        .find(|c| c.attribute("ID") == Some(main))
        .ok_or_else(|| XmlError::Layout(format!("no <BehaviorTree ID=\"{main}\">")))?;
    let mut kids = tree.children().filter(|c| c.is_element());
    let (Some(top), None) = (kids.next(), kids.next()) else {
        return Err(XmlError::Layout("a tree must have exactly one root node".into()));
    };
    read_node(top)
}

fn read_node(n: roxmltree::Node<'_, '_>) -> Result<BtNode, XmlError> {
    let children = || n.children().filter(|c| c.is_element()).map(read_node).collect::<Result<Vec<_>, _>>();
    Ok(match n.tag_name().name() {
        "Sequence" => BtNode::Sequence(children()?),
        "Parallel" => BtNode::Parallel(children()?),
        "WaitFor" => {
            let ids = n.attribute("actions").unwrap_or_default();
            BtNode::WaitFor(ids.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect())
        }
        name => {
            let id = n
                .attribute("name")
                .ok_or_else(|| XmlError::Layout(format!("<{name}> has no name attribute")))?;
            let params = n
                .attributes()
                .filter(|a| a.name() != "name")
                .map(|a| (a.name().to_string(), a.value().to_string()))
                .collect();
            BtNode::Action(ActionLeaf { id: id.to_string(), name: name.to_string(), params })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(id: &str, name: &str, params: &[(&str, &str)]) -> BtNode {
        BtNode::Action(ActionLeaf {
            id: id.into(),
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        })
    }

    #[test]
    fn sequence_with_one_leaf() {
        let t = BtNode::Sequence(vec![leaf("a1", "move_arm", &[("arm", "a1"), ("x", "1"), ("y", "1")])]);
        let xml = emit_xml(&t);
        assert!(xml.contains("    <Sequence>\n      <move_arm name=\"a1\" arm=\"a1\" x=\"1\" y=\"1\"/>\n    </Sequence>\n"));
        assert_eq!(parse_xml(&xml).unwrap(), t);
    }

    #[test]
    fn parallel_of_sequences_and_joins() {
        let t = BtNode::Parallel(vec![
            BtNode::Sequence(vec![leaf("a1", "grip", &[("agent", "a1")])]),
            BtNode::Sequence(vec![
                leaf("a2", "grip", &[("agent", "a2")]),
                BtNode::WaitFor(vec!["a1".into(), "a2".into()]),
                leaf("a3", "odd", &[("v", "'x<y'")]),
            ]),
        ]);
        let xml = emit_xml(&t);
        assert!(xml.contains("<Parallel success_count=\"-1\" failure_count=\"1\">"));
        assert!(xml.contains("<WaitFor actions=\"a1;a2\"/>"));
        assert_eq!(parse_xml(&xml).unwrap(), t);
    }

    #[test]
    fn empty_tree() {
        let t = BtNode::Sequence(vec![]);
        assert_eq!(parse_xml(&emit_xml(&t)).unwrap(), t);
    }

    #[test]
    fn rejects_other_layouts() {
        assert!(matches!(parse_xml("<root/>"), Err(XmlError::Layout(_))));
        assert!(matches!(parse_xml("<root"), Err(XmlError::Syntax(_))));
    }
}
