use std::io::Write;

use super::AnswerVector;
use crate::{NodeId, Result};

/// The `k` highest-valued nodes, ties to the smaller id.
pub fn top_k(answer: &AnswerVector, k: usize) -> Vec<(NodeId, f64)> {
    let mut ranked: Vec<(NodeId, f64)> = answer
        .values
        .iter()
        .enumerate()
        .map(|(u, &v)| (u as NodeId, v))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

/// Writes `node<TAB>value` rows, either every node by id or the top `k`.
pub fn write_tsv(answer: &AnswerVector, top: Option<usize>, mut out: impl Write) -> Result<()> {
    let rows: Vec<(NodeId, f64)> = match top {
        Some(k) => top_k(answer, k),
        None => answer
            .values
            .iter()
            .enumerate()
            .map(|(u, &v)| (u as NodeId, v))
            .collect(),
    };
    let io = |e| crate::Error::io("<output>", e);
    for (u, v) in rows {
        writeln!(out, "{u}\t{v}").map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::QueryKind;

    fn answer(values: Vec<f64>) -> AnswerVector {
        AnswerVector {
            kind: QueryKind::Rwr,
            query: 0,
            values,
            converged: true,
            iterations: 1,
        }
    }

    #[test]
    fn ranks_with_ties() {
        let a = answer(vec![0.1, 0.4, 0.4, 0.1]);
        assert_eq!(top_k(&a, 3), vec![(1, 0.4), (2, 0.4), (0, 0.1)]);
    }

    #[test]
    fn tsv_rows() {
        let a = answer(vec![0.0, 2.0, 1.0]);
        let mut buf = Vec::new();
        write_tsv(&a, None, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0\t0\n1\t2\n2\t1\n");
        let mut buf = Vec::new();
        write_tsv(&a, Some(1), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1\t2\n");
    }
}
