use serde::{Deserialize, Serialize};

/// Merge threshold and the relative reductions rejected under it during the
/// current iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub theta: f64,
    rejected: Vec<f64>,
}

impl ThresholdState {
    pub fn new(theta: f64) -> Self {
        ThresholdState {
            theta,
            rejected: Vec::new(),
        }
    }

    pub fn record(&mut self, rel_delta: f64) {
        debug_assert!(rel_delta < self.theta);
        self.rejected.push(rel_delta);
    }

    pub fn rejected(&self) -> &[f64] {
        &self.rejected
    }
}

/// Moves `theta` to the `floor(beta * |L|)`-th largest rejected value (when
/// that rank is at least 1) and clears the list.
pub fn update_threshold(state: &mut ThresholdState, beta: f64) {
    let rank = (beta * state.rejected.len() as f64).floor() as usize;
    if rank >= 1 {
        let idx = rank - 1;
        let (_, kth, _) = state
            .rejected
            .select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
        state.theta = *kth;
    }
    state.rejected.clear();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(values: &[f64]) -> ThresholdState {
        let mut s = ThresholdState::new(0.5);
        for &v in values {
            s.record(v);
        }
        s
    }

    #[test]
    fn picks_rank_from_the_top() {
        let mut s = with(&[0.4, 0.1, 0.3, 0.2, 0.45, 0.05, 0.35, 0.15, 0.25, 0.44]);
        update_threshold(&mut s, 0.1);
        assert_eq!(s.theta, 0.45);
        assert!(s.rejected().is_empty());

        let mut s = with(&[0.4, 0.1, 0.3, 0.2, 0.45, 0.05, 0.35, 0.15, 0.25, 0.44]);
        update_threshold(&mut s, 0.3);
        assert_eq!(s.theta, 0.4);
    }

    #[test]
    fn unchanged_without_evidence() {
        let mut s = with(&[]);
        update_threshold(&mut s, 0.1);
        assert_eq!(s.theta, 0.5);
        let mut s = with(&[0.2]);
        update_threshold(&mut s, 0.1);
        assert_eq!(s.theta, 0.5);
        assert!(s.rejected().is_empty());
    }

    #[test]
    fn never_increases() {
        let mut s = ThresholdState::new(0.5);
        let mut last = s.theta;
        for round in 0..20 {
            for i in 0..37 {
                let v = s.theta - 0.001 - ((i * 7 + round) % 13) as f64 * 0.01;
                s.record(v);
            }
            update_threshold(&mut s, 0.1);
            assert!(s.theta <= last);
            last = s.theta;
        }
    }
}
