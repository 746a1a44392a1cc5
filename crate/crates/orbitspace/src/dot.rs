//! Graphviz DOT output, and a small reader for the subset it writes.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::morse::MorseGraph;
use crate::quotient::QuotientSpace;
use crate::relations::RelationMatrix;
use crate::topology::{FinitePreorder, MultiGraph};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Hasse diagram of a preorder, arrows pointing up.
pub fn preorder_dot(name: &str, p: &FinitePreorder) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n", quote(name));
    for e in p.elements() {
        writeln!(out, "  {};", quote(e)).unwrap();
    }
    for (a, b) in p.covering_pairs() {
        writeln!(out, "  {} -> {};", quote(p.label(a)), quote(p.label(b))).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn quotient_dot(q: &QuotientSpace) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n", quote(&q.level.to_string()));
    for b in &q.blocks {
        writeln!(out, "  {} [label={}];", quote(&b.label), quote(&format!("{{{}}}", b.members.join(", ")))).unwrap();
    }
    for (a, b) in q.order.covering_pairs() {
        writeln!(out, "  {} -> {};", quote(q.order.label(a)), quote(q.order.label(b))).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Every non-reflexive pair `x R y` as an arrow `x -> y`.
pub fn relation_dot(r: &RelationMatrix) -> String {
    let mut out = format!("digraph {} {{\n  label={};\n", quote(&format!("{}-{}", r.name, r.level)), quote(&r.name.to_string()));
    for e in &r.elements {
        writeln!(out, "  {};", quote(e)).unwrap();
    }
    for (a, b) in r.pairs() {
        writeln!(out, "  {} -> {};", quote(&a), quote(&b)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Morse sets as nodes `M0, M1, ...`, labeled by their atoms.
pub fn morse_dot<A: std::fmt::Display>(g: &MorseGraph<A>) -> String {
    let mut out = String::from("digraph \"morse\" {\n");
    for (i, s) in g.morse_sets.iter().enumerate() {
        let atoms: Vec<String> = s.iter().map(|a| a.to_string()).collect();
        let label = if atoms.len() > 6 { format!("{} atoms", atoms.len()) } else { atoms.join(", ") };
        writeln!(out, "  \"M{i}\" [label={}];", quote(&label)).unwrap();
    }
    for e in &g.edges {
        writeln!(out, "  \"M{}\" -> \"M{}\";", e.from, e.to).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Undirected multigraph; a dangling edge gets an invisible end.
pub fn multigraph_dot(g: &MultiGraph) -> String {
    let mut out = String::from("graph \"reeb\" {\n");
    for v in &g.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (k, e) in g.edges.iter().enumerate() {
        match e.ends.as_slice() {
            [a, b] => writeln!(out, "  {} -- {} [label={}];", quote(a), quote(b), quote(&e.label)).unwrap(),
            [a] => {
                let open = format!("_end{k}");
                writeln!(out, "  {} [shape=point];", quote(&open)).unwrap();
                writeln!(out, "  {} -- {} [label={}];", quote(a), quote(&open), quote(&e.label)).unwrap();
            }
            _ => {}
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DotGraph {
    pub name: String,
    pub directed: bool,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Id(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(Error::Parse("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') if i + 1 < chars.len() => {
                            s.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            '-' if matches!(chars.get(i + 1), Some('>') | Some('-')) => {
                out.push(Tok::Sym(if chars[i + 1] == '>' { "->" } else { "--" }));
                i += 2;
            }
            '{' | '}' | '[' | ']' | ';' | ',' | '=' => {
                out.push(Tok::Sym(match c {
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    ';' => ";",
                    ',' => ",",
                    _ => "=",
                }));
                i += 1;
            }
            _ if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                if i == start {
                    i += 1;
                }
                out.push(Tok::Id(chars[start..i].iter().collect()));
            }
            _ => return Err(Error::Parse(format!("unexpected character `{c}` in DOT"))),
        }
    }
    Ok(out)
}

/// Reads node and edge statements of a single graph. Attributes are parsed
/// and dropped; subgraphs are not supported.
pub fn parse_dot(src: &str) -> Result<DotGraph> {
    let toks = lex(src)?;
    let mut i = 0;
    let mut g = DotGraph::default();
    let id = |t: Option<&Tok>| match t {
        Some(Tok::Id(s)) => Some(s.clone()),
        _ => None,
    };
    if id(toks.get(i)).as_deref() == Some("strict") {
        i += 1;
    }
    g.directed = match id(toks.get(i)).as_deref() {
        Some("digraph") => true,
        Some("graph") => false,
        _ => return Err(Error::Parse("expected `graph` or `digraph`".into())),
    };
    i += 1;
    if let Some(name) = id(toks.get(i)) {
        g.name = name;
        i += 1;
    }
    if toks.get(i) != Some(&Tok::Sym("{")) {
        return Err(Error::Parse("expected `{`".into()));
    }
    i += 1;
    let edge_op = if g.directed { "->" } else { "--" };
    let add_node = |g: &mut DotGraph, n: &str| {
        if !g.nodes.iter().any(|x| x == n) {
            g.nodes.push(n.to_string());
        }
    };
    loop {
        match toks.get(i) {
            None => return Err(Error::Parse("missing `}`".into())),
            Some(Tok::Sym("}")) => {
                i += 1;
                break;
            }
            Some(Tok::Sym(";")) => i += 1,
            Some(Tok::Id(first)) => {
                let mut chain = vec![first.clone()];
                i += 1;
                if toks.get(i) == Some(&Tok::Sym("=")) {
                    // Graph attribute such as rankdir=BT.
                    if id(toks.get(i + 1)).is_none() {
                        return Err(Error::Parse("expected a value after `=`".into()));
                    }
                    i += 2;
                    continue;
                }
                while let Some(Tok::Sym(op)) = toks.get(i) {
                    if *op == "->" || *op == "--" {
                        if *op != edge_op {
                            return Err(Error::Parse(format!("`{op}` in a {} graph", if g.directed { "directed" } else { "undirected" })));
                        }
                        chain.push(id(toks.get(i + 1)).ok_or_else(|| Error::Parse("edge without a target".into()))?);
                        i += 2;
                    } else {
                        break;
                    }
                }
                if toks.get(i) == Some(&Tok::Sym("[")) {
                    i += 1;
                    loop {
                        match toks.get(i) {
                            Some(Tok::Sym("]")) => {
                                i += 1;
                                break;
                            }
                            Some(Tok::Sym(",")) | Some(Tok::Sym(";")) => i += 1,
                            Some(Tok::Id(_)) if toks.get(i + 1) == Some(&Tok::Sym("=")) && id(toks.get(i + 2)).is_some() => {
                                i += 3
                            }
                            _ => return Err(Error::Parse("malformed attribute list".into())),
                        }
                    }
                }
                let keyword = chain.len() == 1 && matches!(chain[0].as_str(), "node" | "edge" | "graph");
                if !keyword {
                    for n in &chain {
                        add_node(&mut g, n);
                    }
                    for w in chain.windows(2) {
                        g.edges.push((w[0].clone(), w[1].clone()));
                    }
                }
            }
            Some(t) => return Err(Error::Parse(format!("unexpected {t:?}"))),
        }
    }
    if i != toks.len() {
        return Err(Error::Parse("trailing input after `}`".into()));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::quotient::{compute_quotient, Level};

    #[test]
    fn quotient_round_trip() {
        let q = compute_quotient(&corpus::load("ham-disk").unwrap(), Level::Awo).unwrap();
        let g = parse_dot(&quotient_dot(&q)).unwrap();
        assert!(g.directed);
        assert_eq!(g.nodes, q.labels());
        let want: Vec<(String, String)> = q
            .order
            .covering_pairs()
            .into_iter()
            .map(|(a, b)| (q.order.label(a).to_string(), q.order.label(b).to_string()))
            .collect();
        assert_eq!(g.edges, want);
    }

    #[test]
    fn quoting_survives() {
        let p = FinitePreorder::from_pairs(vec!["a \"b\"".into(), "c\\d".into()], &[(0, 1)]);
        let g = parse_dot(&preorder_dot("x", &p)).unwrap();
        assert_eq!(g.nodes, vec!["a \"b\"".to_string(), "c\\d".to_string()]);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn reader_handles_chains_and_keywords() {
        let g = parse_dot("strict digraph G { node [shape=box]; a -> b -> c; d; // note\n }").unwrap();
        assert_eq!(g.nodes, vec!["a", "b", "c", "d"]);
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn reader_rejects_garbage() {
        for bad in ["", "digraph {", "graph { a -> b }", "digraph { a -> }", "digraph { a [x] }", "digraph { } x"] {
            assert!(parse_dot(bad).is_err(), "{bad}");
        }
    }
}
