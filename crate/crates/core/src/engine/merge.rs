//! Pair evaluation and the greedy merge-and-add step.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::threshold::ThresholdState;
use super::Summarizer;
use crate::summary::{error_unit_bits, log2, optimal_superedge_choice, pair_cost, CostModel, NeighborProfile, PairStats, ProfileEntry};
use crate::{Error, Graph, Result, SummaryGraph, SupernodeId, WeightModel};

/// Outcome of pricing the merge of `a` and `b` in the current summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeEvaluation {
    pub a: SupernodeId,
    pub b: SupernodeId,
    /// `Cost_A + Cost_B - Cost_AB`.
    pub cost_before: f64,
    /// Cost of the merged supernode with its best incident superedges.
    pub cost_after: f64,
    pub delta: f64,
    /// `delta / cost_before`, or 0 when `cost_before` is 0.
    pub rel_delta: f64,
    /// Supernodes (other than the merged one) that get a superedge.
    pub planned: Vec<SupernodeId>,
    pub self_loop: bool,
    pub(crate) error_before: f64,
    pub(crate) error_after: f64,
}

/// One applied merge, for the audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub a: SupernodeId,
    pub b: SupernodeId,
    pub kept: SupernodeId,
    pub rel_delta: f64,
    pub theta: f64,
}

/// Prices merging `a` and `b` in `summary` from scratch.
pub fn evaluate_merge(
    graph: &Graph,
    weights: &WeightModel,
    summary: &SummaryGraph,
    a: SupernodeId,
    b: SupernodeId,
) -> Result<MergeEvaluation> {
    if a == b {
        return Err(Error::InvalidParameter(format!("cannot merge supernode {a} with itself")));
    }
    summary.check_live(a)?;
    summary.check_live(b)?;
    let model = CostModel::new(graph, weights, summary)?;
    let mut scratch = crate::summary::ProfileScratch::default();
    let pa = model.profile(summary, a, &mut scratch);
    let pb = model.profile(summary, b, &mut scratch);
    Ok(evaluate_profiles(&model, summary, &pa, &pb, true))
}

pub(crate) fn evaluate_profiles(
    model: &CostModel<'_>,
    summary: &SummaryGraph,
    pa: &NeighborProfile,
    pb: &NeighborProfile,
    plan: bool,
) -> MergeEvaluation {
    let (a, b) = (pa.supernode, pb.supernode);
    let n = summary.node_count();
    let s = summary.supernode_count();
    let lg_n = error_unit_bits(n);
    // Superedge price after the merge, with |S| - 1 supernodes.
    let edge_bits = 2.0 * log2(s - 1);

    let ab = pa.get(b);
    let ab_present = ab.map_or(0.0, |e| e.present_mass);
    let ab_count = ab.map_or(0, |e| e.edge_count as usize);
    let ab_stats = PairStats {
        present_mass: ab_present,
        total_mass: model.pair_total(a, b),
        edge_count: ab_count,
    };
    let ab_has = summary.has_superedge(a, b);
    let cost_ab = pair_cost(&ab_stats, ab_has, s, n);
    let cost_before = pa.cost(summary) + pb.cost(summary) - cost_ab;
    let error_before = pa.error + pb.error - ab_stats.error(ab_has);

    let mass = model.mass(a) + model.mass(b);
    let scale = mass / model.weights().z();
    let mut cost_after = 0.0;
    let mut error_after = 0.0;
    let mut planned = Vec::new();

    let (ea, eb) = (&pa.entries, &pb.entries);
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        let xa = ea.get(i).map_or(SupernodeId::MAX, |e| e.supernode);
        let xb = eb.get(j).map_or(SupernodeId::MAX, |e| e.supernode);
        let x = xa.min(xb);
        let mut present = 0.0;
        let mut x_mass = 0.0;
        if xa == x {
            present += ea[i].present_mass;
            x_mass = ea[i].mass;
            i += 1;
        }
        if xb == x {
            present += eb[j].present_mass;
            x_mass = eb[j].mass;
            j += 1;
        }
        if x == a || x == b {
            continue;
        }
        let missing = (scale * x_mass - present).max(0.0);
        let with = edge_bits + lg_n * missing;
        let without = lg_n * present;
        if with < without {
            cost_after += with;
            error_after += missing;
            if plan {
                planned.push(x);
            }
        } else {
            cost_after += without;
            error_after += present;
        }
    }

    let self_present =
        pa.get(a).map_or(0.0, |e| e.present_mass) + pb.get(b).map_or(0.0, |e| e.present_mass) + ab_present;
    let self_count = pa.get(a).map_or(0, |e| e.edge_count as usize)
        + pb.get(b).map_or(0, |e| e.edge_count as usize)
        + ab_count;
    let sq = model.mass_sq(a) + model.mass_sq(b);
    let self_stats = PairStats {
        present_mass: self_present,
        total_mass: (mass * mass - sq).max(0.0) / (2.0 * model.weights().z()),
        edge_count: self_count,
    };
    let (self_loop, self_cost) = optimal_superedge_choice(&self_stats, s - 1, n);
    cost_after += self_cost;
    error_after += self_stats.error(self_loop);

    let delta = cost_before - cost_after;
    let rel_delta = if cost_before > 0.0 { delta / cost_before } else { 0.0 };
    MergeEvaluation {
        a,
        b,
        cost_before,
        cost_after,
        delta,
        rel_delta,
        planned,
        self_loop,
        error_before,
        error_after,
    }
}

impl Summarizer<'_> {
    /// Prices merging `a` and `b` against the current state.
    pub fn evaluate(&mut self, a: SupernodeId, b: SupernodeId) -> Result<MergeEvaluation> {
        if a == b {
            return Err(Error::InvalidParameter(format!("cannot merge supernode {a} with itself")));
        }
        self.summary.check_live(a)?;
        self.summary.check_live(b)?;
        let pa = self.costs.profile(&self.summary, a, &mut self.scratch);
        let pb = self.costs.profile(&self.summary, b, &mut self.scratch);
        Ok(evaluate_profiles(&self.costs, &self.summary, &pa, &pb, true))
    }

    /// Applies an evaluation produced against the current state. Returns the
    /// surviving supernode id.
    pub fn apply(&mut self, eval: &MergeEvaluation) -> SupernodeId {
        let (_, gone) = self.summary.merge_survivor(eval.a, eval.b);
        let moved = self.summary.members(gone).to_vec();
        let kept = self.summary.merge(eval.a, eval.b);
        self.costs.absorb(kept, gone, &moved);
        for &x in &eval.planned {
            self.summary.add_superedge(kept, x);
        }
        if eval.self_loop {
            self.summary.add_superedge(kept, kept);
        }
        self.error_mass += eval.error_after - eval.error_before;
        self.merges += 1;
        kept
    }

    /// Greedy merging inside one candidate group.
    ///
    /// Each round samples `|group|` pairs uniformly (with replacement), takes
    /// the pair with the largest relative reduction and merges it when that
    /// reduction reaches `theta`; otherwise the value goes to the rejected
    /// list. The group is abandoned after more than `log2 |group|`
    /// consecutive failures.
    pub fn merge_and_add<R: Rng + ?Sized>(
        &mut self,
        mut group: Vec<SupernodeId>,
        threshold: &mut ThresholdState,
        rng: &mut R,
    ) {
        let mut fails = 0usize;
        // Profiles of group members stay valid across rounds: only group
        // members merge while this group runs, so a cached profile only needs
        // its entries for the merged pair folded together.
        let mut profiles: HashMap<SupernodeId, NeighborProfile> = HashMap::new();
        while group.len() > 1 && (fails as f64) <= (group.len() as f64).log2() {
            let len = group.len();
            let mut best: Option<MergeEvaluation> = None;
            for _ in 0..len {
                let i = rng.gen_range(0..len);
                let mut j = rng.gen_range(0..len);
                while j == i {
                    j = rng.gen_range(0..len);
                }
                let (a, b) = (group[i].min(group[j]), group[i].max(group[j]));
                for x in [a, b] {
                    if !profiles.contains_key(&x) {
                        let p = self.costs.profile(&self.summary, x, &mut self.scratch);
                        profiles.insert(x, p);
                    }
                }
                let eval = evaluate_profiles(&self.costs, &self.summary, &profiles[&a], &profiles[&b], false);
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        eval.rel_delta > cur.rel_delta
                            || (eval.rel_delta == cur.rel_delta && (a, b) < (cur.a, cur.b))
                    }
                };
                if better {
                    best = Some(eval);
                }
            }
            let best = best.expect("at least one sampled pair");
            if best.rel_delta >= threshold.theta {
                let pa = profiles.remove(&best.a).expect("profiled");
                let pb = profiles.remove(&best.b).expect("profiled");
                let best = evaluate_profiles(&self.costs, &self.summary, &pa, &pb, true);
                let old_errors: Vec<(SupernodeId, f64)> = profiles
                    .values()
                    .map(|p| (p.supernode, self.pair_error(p, best.a) + self.pair_error(p, best.b)))
                    .collect();
                let kept = self.apply(&best);
                let kept_mass = self.costs.mass(kept);
                for (x, old) in old_errors {
                    let p = profiles.get_mut(&x).expect("cached");
                    fold_entries(p, best.a, best.b, kept, kept_mass);
                    p.error += self.pair_error(p, kept) - old;
                }
                profiles.insert(
                    kept,
                    NeighborProfile {
                        supernode: kept,
                        entries: merged_entries(&pa, &pb, kept, kept_mass),
                        error: best.error_after,
                    },
                );
                if let Some(audit) = self.audit.as_mut() {
                    audit.merges.push(MergeRecord {
                        a: best.a,
                        b: best.b,
                        kept,
                        rel_delta: best.rel_delta,
                        theta: threshold.theta,
                    });
                }
                group.retain(|&x| x != best.a && x != best.b);
                group.push(kept);
                fails = 0;
            } else {
                threshold.record(best.rel_delta);
                fails += 1;
            }
        }
    }

    /// Error of the pair `{p.supernode, y}` under the current summary.
    fn pair_error(&self, p: &NeighborProfile, y: SupernodeId) -> f64 {
        let x = p.supernode;
        let stats = PairStats {
            present_mass: p.get(y).map_or(0.0, |e| e.present_mass),
            total_mass: self.costs.pair_total(x, y),
            edge_count: 0,
        };
        stats.error(self.summary.has_superedge(x, y))
    }
}

/// Entries of `a ∪ b` from the two profiles; the `{a, b}`, `{a, a}` and
/// `{b, b}` entries become the self entry of `kept`.
fn merged_entries(pa: &NeighborProfile, pb: &NeighborProfile, kept: SupernodeId, kept_mass: f64) -> Vec<ProfileEntry> {
    let (a, b) = (pa.supernode, pb.supernode);
    let mut out: Vec<ProfileEntry> = Vec::with_capacity(pa.entries.len() + pb.entries.len());
    let mut own = ProfileEntry {
        supernode: kept,
        present_mass: 0.0,
        mass: kept_mass,
        edge_count: 0,
    };
    let (ea, eb) = (&pa.entries, &pb.entries);
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        let xa = ea.get(i).map_or(SupernodeId::MAX, |e| e.supernode);
        let xb = eb.get(j).map_or(SupernodeId::MAX, |e| e.supernode);
        let x = xa.min(xb);
        let mut e = ProfileEntry {
            supernode: x,
            present_mass: 0.0,
            mass: 0.0,
            edge_count: 0,
        };
        if xa == x {
            e.mass = ea[i].mass;
            e.present_mass += ea[i].present_mass;
            e.edge_count += ea[i].edge_count;
            i += 1;
        }
        if xb == x {
            // Pair {a, b} appears in both profiles; count it once.
            e.mass = eb[j].mass;
            if x != a {
                e.present_mass += eb[j].present_mass;
                e.edge_count += eb[j].edge_count;
            }
            j += 1;
        }
        if x == a || x == b {
            own.present_mass += e.present_mass;
            own.edge_count += e.edge_count;
        } else {
            out.push(e);
        }
    }
    if own.edge_count > 0 {
        let pos = out.partition_point(|e| e.supernode < kept);
        out.insert(pos, own);
    }
    out
}

/// Replaces the entries for `a` and `b` in `p` with a single one for `kept`.
fn fold_entries(p: &mut NeighborProfile, a: SupernodeId, b: SupernodeId, kept: SupernodeId, kept_mass: f64) {
    let mut folded = ProfileEntry {
        supernode: kept,
        present_mass: 0.0,
        mass: kept_mass,
        edge_count: 0,
    };
    p.entries.retain(|e| {
        if e.supernode == a || e.supernode == b {
            folded.present_mass += e.present_mass;
            folded.edge_count += e.edge_count;
            false
        } else {
            true
        }
    });
    if folded.edge_count > 0 {
        let pos = p.entries.partition_point(|e| e.supernode < kept);
        p.entries.insert(pos, folded);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{total_cost, total_cost_reconstructed};
    use crate::TargetSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Graph {
        Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn merging_twins_is_lossless_and_profitable() {
        let g = toy();
        let w = WeightModel::uniform(5);
        let s = SummaryGraph::initial(&g);
        let e = evaluate_merge(&g, &w, &s, 0, 1).unwrap();
        assert!(e.delta > 0.0 && e.rel_delta > 0.0);
        assert_eq!(e.planned, vec![2, 3]);
        assert!(!e.self_loop);
        assert_eq!(e.error_after, 0.0);
        // Before: two superedges each at 2 log2 5; after: two at 2 log2 4.
        let before = 8.0 * 5f64.log2();
        assert!((e.cost_before - before).abs() < 1e-12);
        assert!((e.cost_after - 8.0).abs() < 1e-12);
    }

    #[test]
    fn dissimilar_pair_scores_lower() {
        let g = toy();
        let w = WeightModel::uniform(5);
        let s = SummaryGraph::initial(&g);
        let ab = evaluate_merge(&g, &w, &s, 0, 1).unwrap().rel_delta;
        // e has the same open neighbourhood {c, d} as a and b.
        let ae = evaluate_merge(&g, &w, &s, 0, 4).unwrap().rel_delta;
        assert!((ae - ab).abs() < 1e-12);
        let ac = evaluate_merge(&g, &w, &s, 0, 2).unwrap().rel_delta;
        assert!(ac < ab);
        // Brute-force oracle: apply the merge with every possible incident
        // superedge subset and confirm the planned one is the cheapest.
        let e = evaluate_merge(&g, &w, &s, 0, 2).unwrap();
        let mut best = f64::INFINITY;
        let others = [1u32, 3, 4];
        for mask in 0..16u32 {
            let membership = vec![0, 1, 0, 3, 4];
            let mut edges: Vec<(u32, u32)> = s
                .superedges()
                .into_iter()
                .filter(|&(x, y)| ![0, 2].contains(&x) && ![0, 2].contains(&y))
                .collect();
            for (k, &x) in others.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    edges.push((0, x));
                }
            }
            if mask & 8 != 0 {
                edges.push((0, 0));
            }
            let m = SummaryGraph::from_parts(membership, &edges).unwrap();
            let c = crate::summary::supernode_cost(&g, &w, &m, 0).unwrap();
            best = best.min(c);
        }
        assert!((e.cost_after - best).abs() < 1e-9, "{} vs {}", e.cost_after, best);
    }

    #[test]
    fn isolated_pair_has_zero_relative_reduction() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let w = WeightModel::uniform(4);
        let s = SummaryGraph::initial(&g);
        let e = evaluate_merge(&g, &w, &s, 2, 3).unwrap();
        assert_eq!((e.cost_before, e.cost_after, e.rel_delta), (0.0, 0.0, 0.0));
        assert!(evaluate_merge(&g, &w, &s, 2, 2).is_err());
    }

    #[test]
    fn merge_and_add_on_twins() {
        let g = toy();
        let w = WeightModel::uniform(5);
        let mut sm = Summarizer::new(&g, &w);
        let mut thr = ThresholdState::new(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sm.merge_and_add(vec![0, 1], &mut thr, &mut rng);
        let s = sm.summary();
        assert_eq!(s.members(0), &[0, 1]);
        assert!(s.has_superedge(0, 2) && s.has_superedge(0, 3));
        assert_eq!(s.reconstruct(false).unwrap(), g);
        assert_eq!(sm.error_mass(), 0.0);
    }

    #[test]
    fn threshold_above_one_blocks_everything() {
        let g = toy();
        let w = WeightModel::uniform(5);
        let mut sm = Summarizer::new(&g, &w);
        let mut thr = ThresholdState::new(1.01);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sm.merge_and_add(vec![0, 1, 2, 3, 4], &mut thr, &mut rng);
        assert_eq!(sm.summary().supernode_count(), 5);
        // fails may reach floor(log2 5) + 1 = 3 before the loop stops.
        assert_eq!(thr.rejected().len(), 3);
        assert!(thr.rejected().iter().all(|&v| v < 1.01));
    }

    #[test]
    fn cached_group_run_matches_fresh_profiles() {
        let g = crate::graph::generate_ba(200, 3, 4).unwrap();
        let t = TargetSet::new(vec![0], 200).unwrap();
        let w = WeightModel::build(&g, &t, 1.25).unwrap();
        let mut sm = Summarizer::new(&g, &w).with_audit();
        let mut thr = ThresholdState::new(-1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        sm.merge_and_add((0..60).collect(), &mut thr, &mut rng);
        let audit = sm.audit().unwrap().clone();
        assert!(audit.merges.len() > 10);

        // Replay the merge sequence with fresh evaluations each step.
        let mut fresh = Summarizer::new(&g, &w);
        for m in &audit.merges {
            let e = evaluate_merge(&g, &w, fresh.summary(), m.a, m.b).unwrap();
            assert!((e.rel_delta - m.rel_delta).abs() < 1e-9, "{} vs {}", e.rel_delta, m.rel_delta);
            fresh.apply(&e);
        }
        assert_eq!(fresh.summary(), sm.summary());
        let brute = total_cost_reconstructed(&g, &w, sm.summary(), false).unwrap();
        assert!(((sm.incremental_total_cost() - brute) / brute).abs() < 1e-9);
    }

    #[test]
    fn incremental_cost_tracks_recomputation() {
        let g = crate::graph::generate_ba(150, 3, 2).unwrap();
        let t = TargetSet::new(vec![4, 40], 150).unwrap();
        let w = WeightModel::build(&g, &t, 1.5).unwrap();
        let mut sm = Summarizer::new(&g, &w);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for step in 0..120 {
            let live: Vec<_> = sm.summary().live_supernodes().collect();
            let a = live[rng.gen_range(0..live.len())];
            let b = live[rng.gen_range(0..live.len())];
            if a == b {
                continue;
            }
            let e = sm.evaluate(a, b).unwrap();
            let oracle = evaluate_merge(&g, &w, sm.summary(), a, b).unwrap();
            assert!((e.rel_delta - oracle.rel_delta).abs() < 1e-12);
            sm.apply(&e);
            if step % 10 == 0 {
                let brute = total_cost_reconstructed(&g, &w, sm.summary(), false).unwrap();
                let inc = sm.incremental_total_cost();
                assert!(((inc - brute) / brute).abs() < 1e-9, "{inc} vs {brute}");
                let agg = total_cost(&g, &w, sm.summary());
                assert!(((agg - brute) / brute).abs() < 1e-9);
            }
        }
    }
}
