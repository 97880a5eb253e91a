//! Plain-text formats for functions, graphs, and set systems.
//!
//! All formats are line based. Blank lines and anything after `#` are
//! ignored; line numbers in errors count every physical line from 1.

use crate::error::{Error, Result};
use crate::function::{FunctionKind, SetFunction};
use crate::graph::Graph;
use std::fmt::Write as _;
use std::str::FromStr;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_num<T: FromStr>(token: &str, line: usize) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {token:?}"),
    })
}

fn parse_all<T: FromStr>(tokens: &[&str], line: usize) -> Result<Vec<T>> {
    tokens.iter().map(|t| parse_num(t, line)).collect()
}

fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        e @ Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            msg: other.to_string(),
        },
    }
}

#[derive(Default)]
struct FunctionDraft {
    line: usize,
    kind: String,
    weights: Option<Vec<f64>>,
    constant: Option<f64>,
    exponent: Option<f64>,
    clusters: Vec<Vec<usize>>,
}

impl FunctionDraft {
    fn finish(self, n: usize) -> Result<SetFunction> {
        let line = self.line;
        let err = |msg: String| Error::Parse { line, msg };
        let weights = self
            .weights
            .ok_or_else(|| err(format!("function {} has no weights", self.kind)))?;
        if weights.len() != n {
            return Err(err(format!("expected {n} weights, found {}", weights.len())));
        }
        let f = match self.kind.as_str() {
            "modular" => {
                let m = crate::function::ModularFunction::with_constant(weights, self.constant.unwrap_or(0.0));
                SetFunction::new(FunctionKind::Modular(m.map_err(at(line))?))
            }
            "com" => SetFunction::concave_over_modular(self.clusters, weights, self.exponent.unwrap_or(0.5)),
            "sqrt" => SetFunction::sqrt_modular(weights),
            other => return Err(err(format!("unknown function kind {other:?}"))),
        };
        f.map_err(at(line))
    }
}

/// Parses a function file:
///
/// ```text
/// n 4
/// function modular
/// weights 1 2 3 4
/// constant 0.5          # optional, default 0
/// function com
/// weights 1 1 1 1
/// exponent 0.5          # optional, default 0.5
/// cluster 0 1
/// cluster 2 3
/// function sqrt
/// weights 1 1 2 2
/// ```
pub fn parse_functions(text: &str) -> Result<Vec<SetFunction>> {
    let mut n: Option<usize> = None;
    let mut out = Vec::new();
    let mut draft: Option<FunctionDraft> = None;
    for (line, tokens) in content_lines(text) {
        let err = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        match tokens[0] {
            "n" => {
                if n.is_some() || tokens.len() != 2 {
                    return Err(err("expected a single `n <size>` line"));
                }
                n = Some(parse_num(tokens[1], line)?);
            }
            "function" => {
                let size = n.ok_or_else(|| err("`n` must precede the first function"))?;
                if tokens.len() != 2 {
                    return Err(err("expected `function <modular|com|sqrt>`"));
                }
                if let Some(d) = draft.take() {
                    out.push(d.finish(size)?);
                }
                draft = Some(FunctionDraft {
                    line,
                    kind: tokens[1].to_string(),
                    ..FunctionDraft::default()
                });
            }
            key => {
                let d = draft.as_mut().ok_or_else(|| err("field outside a function block"))?;
                match key {
                    "weights" => d.weights = Some(parse_all(&tokens[1..], line)?),
                    "constant" | "exponent" => {
                        if tokens.len() != 2 {
                            return Err(err("expected one value"));
                        }
                        let v = parse_num(tokens[1], line)?;
                        if key == "constant" {
                            d.constant = Some(v);
                        } else {
                            d.exponent = Some(v);
                        }
                    }
                    "cluster" => d.clusters.push(parse_all(&tokens[1..], line)?),
                    other => return Err(err(&format!("unknown field {other:?}"))),
                }
            }
        }
    }
    let size = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `n` line".into(),
    })?;
    if let Some(d) = draft.take() {
        out.push(d.finish(size)?);
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no functions defined".into(),
        });
    }
    Ok(out)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Inverse of [`parse_functions`] for modular, concave-over-modular, and
/// sqrt-of-modular functions.
pub fn write_functions(functions: &[SetFunction]) -> Result<String> {
    let n = functions
        .first()
        .ok_or_else(|| Error::InvalidArgument("no functions to write".into()))?
        .n();
    let mut s = format!("n {n}\n");
    for f in functions {
        match f.kind() {
            FunctionKind::Modular(m) => {
                let _ = writeln!(s, "function modular\nweights {}", join(m.weights()));
                if m.constant() != 0.0 {
                    let _ = writeln!(s, "constant {}", m.constant());
                }
            }
            FunctionKind::ConcaveOverModular(c) => {
                let _ = writeln!(
                    s,
                    "function com\nweights {}\nexponent {}",
                    join(c.weights()),
                    c.exponent()
                );
                for cluster in c.clusters() {
                    let _ = writeln!(s, "cluster {}", join(cluster));
                }
            }
            FunctionKind::SqrtModular(q) => {
                let _ = writeln!(s, "function sqrt\nweights {}", join(q.weights()));
            }
            FunctionKind::ScaledSum(_) => {
                return Err(Error::NotApplicable("scaled sums have no file form".into()));
            }
        }
    }
    Ok(s)
}

/// Parses a graph file: a header `n m`, `n m L`, `n m s t`, or `n m s t L`
/// (`L` = size of the left side of a bipartition, vertices `0..L`), then `m`
/// lines `u v`.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty graph file".into(),
    })?;
    let nums: Vec<usize> = parse_all(&header, hline)?;
    let (n, m, terminals, left) = match nums[..] {
        [n, m] => (n, m, None, None),
        [n, m, l] => (n, m, None, Some(l)),
        [n, m, s, t] => (n, m, Some((s, t)), None),
        [n, m, s, t, l] => (n, m, Some((s, t)), Some(l)),
        _ => {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `n m [s t] [L]`".into(),
            })
        }
    };
    let mut edges = Vec::with_capacity(m);
    let mut last = hline;
    for (line, tokens) in lines {
        last = line;
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "edge lines are `u v`".into(),
            });
        }
        edges.push((parse_num(tokens[0], line)?, parse_num(tokens[1], line)?));
        if edges.len() > m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the declared {m} edges"),
            });
        }
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: last,
            msg: format!("declared {m} edges, found {}", edges.len()),
        });
    }
    let mut g = Graph::new(n, edges).map_err(at(hline))?;
    if let Some((s, t)) = terminals {
        g = g.with_terminals(s, t).map_err(at(hline))?;
    }
    if let Some(l) = left {
        g = g.with_bipartition(l).map_err(at(hline))?;
    }
    Ok(g)
}

pub fn write_graph(g: &Graph) -> String {
    let mut header = vec![g.vertices(), g.edge_count()];
    if let Some((s, t)) = g.terminals() {
        header.extend([s, t]);
    }
    if let Some(l) = g.left_size() {
        header.push(l);
    }
    let mut s = join(&header) + "\n";
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

/// Parses a cover file: the universe size, then one covering set per line.
pub fn parse_cover(text: &str) -> Result<(usize, Vec<Vec<usize>>)> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty cover file".into(),
    })?;
    if header.len() != 1 {
        return Err(Error::Parse {
            line: hline,
            msg: "first line is the universe size".into(),
        });
    }
    let universe: usize = parse_num(header[0], hline)?;
    let mut sets = Vec::new();
    for (line, tokens) in lines {
        let set: Vec<usize> = parse_all(&tokens, line)?;
        crate::sets::validate(&set, universe).map_err(at(line))?;
        sets.push(set);
    }
    Ok((universe, sets))
}

pub fn write_cover(universe: usize, sets: &[Vec<usize>]) -> String {
    let mut s = format!("{universe}\n");
    for set in sets {
        let _ = writeln!(s, "{}", join(set));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_round_trip() {
        let fs = vec![
            SetFunction::modular(vec![1.0, 2.5, 0.1]).unwrap(),
            SetFunction::concave_over_modular(vec![vec![0, 1], vec![2]], vec![1.0, 1.0, 4.0], 0.5).unwrap(),
            SetFunction::sqrt_modular(vec![0.3, 0.2, 1e-7]).unwrap(),
        ];
        let text = write_functions(&fs).unwrap();
        assert_eq!(parse_functions(&text).unwrap(), fs);
    }

    #[test]
    fn function_errors_carry_lines() {
        let text = "n 2\nfunction modular\nweights 1 x\n";
        assert_eq!(
            parse_functions(text),
            Err(Error::Parse {
                line: 3,
                msg: "cannot parse \"x\"".into()
            })
        );
        let short = "n 3\n# comment\nfunction sqrt\nweights 1 2\n";
        assert!(matches!(parse_functions(short), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(
            parse_functions("weights 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn graph_headers() {
        let g = parse_graph("3 2 0 2\n0 1\n1 2\n").unwrap();
        assert_eq!(g.terminals(), Some((0, 2)));
        let b = parse_graph("4 2 2\n0 2\n1 3\n").unwrap();
        assert_eq!(b.left_size(), Some(2));
        let both = parse_graph("4 2 0 3 2\n0 2\n1 3\n").unwrap();
        assert_eq!(parse_graph(&write_graph(&both)).unwrap(), both);
        assert!(matches!(parse_graph("3 2\n0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("3 1\n0 3\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn cover_round_trip() {
        let sets = vec![vec![0, 1], vec![2], vec![0, 2]];
        let text = write_cover(3, &sets);
        assert_eq!(parse_cover(&text).unwrap(), (3, sets));
        assert!(matches!(parse_cover("2\n0 2\n"), Err(Error::Parse { line: 2, .. })));
    }
}
