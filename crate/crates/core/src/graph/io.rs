use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Graph;
use crate::{Error, NodeId, Result};

/// A graph loaded from an edge list together with the remap table:
/// `original_ids[internal]` is the id used in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub original_ids: Vec<u64>,
}

pub fn load_edge_list(path: impl AsRef<Path>, preprocess: bool) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), preprocess)
}

/// Parses whitespace-separated edge lines. Ids are remapped densely in
/// ascending order of their original value.
///
/// With `preprocess`, self-loops are dropped and only the largest connected
/// component is kept (ties go to the component holding the smallest original
/// id). Without it, a self-loop is a parse error.
pub fn parse_edge_list(reader: impl BufRead, preprocess: bool) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two node ids, found {} tokens", tokens.len()),
            });
        }
        let parse = |t: &str| {
            t.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node id {t:?}"),
            })
        };
        let (u, v) = (parse(tokens[0])?, parse(tokens[1])?);
        if u == v {
            if preprocess {
                continue;
            }
            return Err(Error::Parse {
                line: lineno,
                message: format!("self-loop on {u}; load with preprocessing to drop it"),
            });
        }
        raw.push((u, v));
    }

    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    if ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if ids.len() > NodeId::MAX as usize {
        return Err(Error::InvalidParameter("too many distinct node ids".into()));
    }
    let original_ids: Vec<u64> = ids.into_iter().collect();
    let index = |x: u64| original_ids.binary_search(&x).unwrap() as NodeId;
    let graph = Graph::from_edges(
        original_ids.len(),
        raw.iter().map(|&(u, v)| (index(u), index(v))),
    )?;

    if !preprocess {
        return Ok(LoadedGraph {
            graph,
            original_ids,
        });
    }

    let labels = graph.connected_components();
    let mut sizes = vec![0usize; labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0)];
    for &c in &labels {
        sizes[c as usize] += 1;
    }
    // Labels follow smallest member id, so the first maximum wins the tie.
    let best = sizes
        .iter()
        .enumerate()
        .fold((0usize, 0usize), |acc, (c, &s)| if s > acc.1 { (c, s) } else { acc })
        .0 as u32;
    let keep: Vec<NodeId> = (0..graph.node_count() as NodeId)
        .filter(|&u| labels[u as usize] == best)
        .collect();
    let sub = graph.induced(&keep);
    if sub.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(LoadedGraph {
        graph: sub,
        original_ids: keep.iter().map(|&u| original_ids[u as usize]).collect(),
    })
}

/// Writes `u v` lines (`u < v`) in lexicographic order.
pub fn write_edge_list(graph: &Graph, mut out: impl Write) -> std::io::Result<()> {
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Sidecar remap table: `internal<TAB>original` per line.
pub fn write_id_map(original_ids: &[u64], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# internal\toriginal")?;
    for (i, id) in original_ids.iter().enumerate() {
        writeln!(out, "{i}\t{id}")?;
    }
    Ok(())
}
