use nalgebra::DVector;

use super::Scenario;
use crate::labeled::Label;

/// Objects present at one step, in trajectory order.
pub type TruthSet = Vec<(Label, DVector<f64>)>;

/// Noise-free truth for steps `0..s.steps`. Trajectory `id` born at `b` carries label `(b, id)`.
pub fn generate_truth(s: &Scenario) -> Vec<TruthSet> {
    (0..s.steps)
        .map(|k| {
            s.trajectories
                .iter()
                .filter_map(|t| {
                    t.state_at(k, s.sampling_interval)
                        .map(|x| (Label::new(t.birth, t.id), DVector::from_row_slice(&x)))
                })
                .collect()
        })
        .collect()
}

/// Positions `[px, py]` of a truth set.
pub fn positions(set: &TruthSet) -> Vec<[f64; 2]> {
    set.iter().map(|(_, x)| [x[0], x[2]]).collect()
}
