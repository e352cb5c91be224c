//! Identification of the overall scale through `tr(D) = p`.
//!
//! The likelihood only depends on `(beta, Y*, D)` through ratios, so
//! multiplying all three by a positive constant leaves it unchanged. After
//! each `D` update the state is moved back onto `tr(D) = p` by dividing all
//! three by `c = tr(D) / p`. `W` and `Phi` are untouched.

use crate::model::ChainState;

/// Rescale in place; returns `c`.
pub fn rescale_in_place(state: &mut ChainState) -> f64 {
    let p = state.delta.len() as f64;
    let c = state.trace_d() / p;
    if c == 1.0 {
        return c;
    }
    for d in &mut state.delta {
        *d /= c;
    }
    state.beta /= c;
    state.ystar /= c;
    c
}

/// Pure form of [`rescale_in_place`]: the rescaled state, which is also the
/// recorded draw, and the ratio `c`.
pub fn apply_scale_constraints(state: &ChainState) -> (ChainState, f64) {
    let mut out = state.clone();
    let c = rescale_in_place(&mut out);
    (out, c)
}
