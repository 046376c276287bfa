//! Line-oriented text formats for networks and substrate fields.
//!
//! Network files start with `myceliumsim/network/v1` followed by directive
//! lines; `#` starts a comment:
//!
//! ```text
//! myceliumsim/network/v1
//! dim 2
//! seed 42
//! age 3
//! node 0 1.5 2 fruit
//! node 1 2.5 2 tip
//! strand 0 0 1 active
//! tipstate 1 1 0 0 0
//! ```
//!
//! Coordinates are written with the shortest representation that parses back
//! to the same `f64`, which never loses precision. Strand lengths are not
//! stored; they are recomputed from node positions on load.
//!
//! Substrate files start with `myceliumsim/substrate/v1`, then `shape`,
//! `cell_size`, and per-layer data. A layer is either `nutrient uniform 0.5`
//! or `nutrient values` followed by one value per cell in x-fastest order
//! (any whitespace). `mask` takes `0`/`1` values the same way.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::field::{FieldError, Layer, SubstrateField};
use crate::network::{
    MyceliumNetwork, NetworkError, Node, NodeId, NodeKind, StrandId, StrandState, TipState,
};

pub const NETWORK_HEADER: &str = "myceliumsim/network/v1";
pub const SUBSTRATE_HEADER: &str = "myceliumsim/substrate/v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
    #[error("invalid field: {0}")]
    Field(#[from] FieldError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn perr(line: usize, field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_num<T: std::str::FromStr>(tok: Option<&&str>, line: usize, field: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| perr(line, field, "missing value"))?;
    tok.parse()
        .map_err(|_| perr(line, field, format!("cannot parse {tok:?}")))
}

pub fn network_to_string(net: &MyceliumNetwork) -> String {
    let mut out = String::new();
    let dim = net.dim();
    writeln!(out, "{NETWORK_HEADER}").unwrap();
    writeln!(out, "dim {dim}").unwrap();
    writeln!(out, "seed {}", net.seed()).unwrap();
    writeln!(out, "age {}", net.age()).unwrap();
    for n in net.nodes() {
        write!(out, "node {}", n.id).unwrap();
        for c in &n.position[..dim] {
            write!(out, " {c:?}").unwrap();
        }
        writeln!(out, " {}", n.kind.as_str()).unwrap();
    }
    for s in net.strands() {
        writeln!(out, "strand {} {} {} {}", s.id, s.a, s.b, s.state.as_str()).unwrap();
    }
    for (id, t) in net.tip_states() {
        write!(out, "tipstate {id}").unwrap();
        for c in &t.heading[..dim] {
            write!(out, " {c:?}").unwrap();
        }
        writeln!(out, " {}", t.rejections).unwrap();
    }
    out
}

pub fn network_from_str(text: &str) -> Result<MyceliumNetwork, FormatError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, toks)) if toks == [NETWORK_HEADER] => {}
        Some((line, toks)) => {
            return Err(perr(line, "header", format!("expected {NETWORK_HEADER}, found {:?}", toks.join(" "))))
        }
        None => return Err(perr(1, "header", "empty file")),
    }
    let mut dim = None;
    let mut seed = 0u64;
    let mut age = 0u32;
    let mut nodes = Vec::new();
    let mut strands = Vec::new();
    let mut tips = Vec::new();
    for (line, toks) in lines {
        match toks[0] {
            "dim" => {
                let d: usize = parse_num(toks.get(1), line, "dim")?;
                if !(2..=3).contains(&d) {
                    return Err(perr(line, "dim", "must be 2 or 3"));
                }
                dim = Some(d);
            }
            "seed" => seed = parse_num(toks.get(1), line, "seed")?,
            "age" => age = parse_num(toks.get(1), line, "age")?,
            "node" => {
                let d = dim.ok_or_else(|| perr(line, "node", "node before dim"))?;
                if toks.len() != d + 3 {
                    return Err(perr(line, "node", format!("expected id, {d} coordinates and kind")));
                }
                let id: u32 = parse_num(toks.get(1), line, "node.id")?;
                let mut position = [0.0; 3];
                for (axis, slot) in position.iter_mut().enumerate().take(d) {
                    let v: f64 = parse_num(toks.get(2 + axis), line, "node.position")?;
                    if !v.is_finite() {
                        return Err(perr(line, "node.position", "non-finite coordinate"));
                    }
                    *slot = v;
                }
                let kind = NodeKind::parse(toks[d + 2])
                    .ok_or_else(|| perr(line, "node.kind", format!("unknown kind {:?}", toks[d + 2])))?;
                nodes.push((line, Node { id: NodeId(id), position, kind }));
            }
            "strand" => {
                if toks.len() != 5 {
                    return Err(perr(line, "strand", "expected id, a, b and state"));
                }
                let id: u32 = parse_num(toks.get(1), line, "strand.id")?;
                let a: u32 = parse_num(toks.get(2), line, "strand.a")?;
                let b: u32 = parse_num(toks.get(3), line, "strand.b")?;
                let state = StrandState::parse(toks[4])
                    .ok_or_else(|| perr(line, "strand.state", format!("unknown state {:?}", toks[4])))?;
                strands.push((line, StrandId(id), NodeId(a), NodeId(b), state));
            }
            "tipstate" => {
                let d = dim.ok_or_else(|| perr(line, "tipstate", "tipstate before dim"))?;
                if toks.len() != d + 3 {
                    return Err(perr(line, "tipstate", format!("expected id, {d} heading components and rejections")));
                }
                let id: u32 = parse_num(toks.get(1), line, "tipstate.id")?;
                let mut heading = [0.0; 3];
                for (axis, slot) in heading.iter_mut().enumerate().take(d) {
                    *slot = parse_num(toks.get(2 + axis), line, "tipstate.heading")?;
                }
                let rejections: u8 = parse_num(toks.get(d + 2), line, "tipstate.rejections")?;
                tips.push((line, NodeId(id), TipState { heading, rejections }));
            }
            other => return Err(perr(line, "directive", format!("unknown directive {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| perr(1, "dim", "missing dim line"))?;
    if nodes.is_empty() && !strands.is_empty() {
        return Err(perr(strands[0].0, "strand", "strands listed but the node list is empty"));
    }
    let mut net = MyceliumNetwork::new(dim)?;
    net.set_seed(seed);
    net.set_age(age);
    for (line, node) in nodes {
        net.insert_node(node)
            .map_err(|e| perr(line, "node", e.to_string()))?;
    }
    for (line, id, a, b, state) in strands {
        net.insert_strand(id, a, b, state)
            .map_err(|e| perr(line, "strand", e.to_string()))?;
    }
    for (line, id, state) in tips {
        net.set_tip_state(id, state)
            .map_err(|e| perr(line, "tipstate", e.to_string()))?;
    }
    Ok(net)
}

pub fn save_network(net: &MyceliumNetwork, path: &Path) -> Result<(), FormatError> {
    std::fs::write(path, network_to_string(net)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_network(path: &Path) -> Result<MyceliumNetwork, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    network_from_str(&text)
}

pub fn field_to_string(field: &SubstrateField) -> String {
    let mut out = String::new();
    writeln!(out, "{SUBSTRATE_HEADER}").unwrap();
    let shape: Vec<String> = field.shape().iter().map(|n| n.to_string()).collect();
    writeln!(out, "shape {}", shape.join(" ")).unwrap();
    writeln!(out, "cell_size {:?}", field.cell_size()).unwrap();
    let row = field.shape()[0];
    for layer in [Layer::Nutrient, Layer::Attractant, Layer::Repellent] {
        let values = field.layer(layer);
        if values.iter().all(|v| *v == values[0]) {
            writeln!(out, "{} uniform {:?}", layer.name(), values[0]).unwrap();
        } else {
            writeln!(out, "{} values", layer.name()).unwrap();
            for chunk in values.chunks(row) {
                let cells: Vec<String> = chunk.iter().map(|v| format!("{v:?}")).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
    }
    let mask = field.mask();
    if mask.iter().all(|g| *g) {
        writeln!(out, "mask uniform 1").unwrap();
    } else {
        writeln!(out, "mask values").unwrap();
        for chunk in mask.chunks(row) {
            let cells: Vec<&str> = chunk.iter().map(|g| if *g { "1" } else { "0" }).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    }
    out
}

pub fn field_from_str(text: &str) -> Result<SubstrateField, FormatError> {
    let mut lines = content_lines(text).peekable();
    match lines.next() {
        Some((_, toks)) if toks == [SUBSTRATE_HEADER] => {}
        Some((line, _)) => return Err(perr(line, "header", format!("expected {SUBSTRATE_HEADER}"))),
        None => return Err(perr(1, "header", "empty file")),
    }
    let mut shape: Option<Vec<usize>> = None;
    let mut cell_size: Option<f64> = None;
    let mut field: Option<SubstrateField> = None;
    while let Some((line, toks)) = lines.next() {
        let key = toks[0];
        match key {
            "shape" => {
                let dims = toks[1..]
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| perr(line, "shape", format!("cannot parse {t:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                shape = Some(dims);
            }
            "cell_size" => cell_size = Some(parse_num(toks.get(1), line, "cell_size")?),
            "nutrient" | "attractant" | "repellent" | "mask" => {
                if field.is_none() {
                    let s = shape.as_ref().ok_or_else(|| perr(line, key, "layer before shape"))?;
                    let c = cell_size.ok_or_else(|| perr(line, key, "layer before cell_size"))?;
                    field = Some(SubstrateField::new(s, c).map_err(|e| perr(line, "shape", e.to_string()))?);
                }
                let f = field.as_mut().expect("initialized above");
                let n = f.cell_count();
                let values: Vec<f64> = match toks.get(1).copied() {
                    Some("uniform") => {
                        let v: f64 = parse_num(toks.get(2), line, key)?;
                        vec![v; n]
                    }
                    Some("values") => {
                        let mut vals = Vec::with_capacity(n);
                        while vals.len() < n {
                            let (l, row) = lines
                                .next()
                                .ok_or_else(|| perr(line, key, format!("expected {n} values, got {}", vals.len())))?;
                            for t in row {
                                vals.push(t.parse::<f64>().map_err(|_| perr(l, key, format!("cannot parse {t:?}")))?);
                            }
                        }
                        if vals.len() != n {
                            return Err(perr(line, key, format!("expected {n} values, got {}", vals.len())));
                        }
                        vals
                    }
                    _ => return Err(perr(line, key, "expected `uniform <v>` or `values`")),
                };
                let result = match key {
                    "nutrient" => f.set_layer(Layer::Nutrient, values),
                    "attractant" => f.set_layer(Layer::Attractant, values),
                    "repellent" => f.set_layer(Layer::Repellent, values),
                    _ => {
                        if let Some(v) = values.iter().find(|v| **v != 0.0 && **v != 1.0) {
                            return Err(perr(line, "mask", format!("mask values must be 0 or 1, got {v}")));
                        }
                        f.set_mask(values.iter().map(|v| *v == 1.0).collect())
                    }
                };
                result.map_err(|e| perr(line, key, e.to_string()))?;
            }
            other => return Err(perr(line, "directive", format!("unknown directive {other:?}"))),
        }
    }
    match field {
        Some(f) => Ok(f),
        None => {
            let s = shape.ok_or_else(|| perr(1, "shape", "missing shape line"))?;
            let c = cell_size.ok_or_else(|| perr(1, "cell_size", "missing cell_size line"))?;
            Ok(SubstrateField::new(&s, c)?)
        }
    }
}

pub fn load_field(path: &Path) -> Result<SubstrateField, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    field_from_str(&text)
}

pub fn save_field(field: &SubstrateField, path: &Path) -> Result<(), FormatError> {
    std::fs::write(path, field_to_string(field)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
