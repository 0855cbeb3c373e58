//! Shared fixtures for the benchmarks.

use lipforge::game::{run_game, Adversary, GameSetup, GameTranscript};
use lipforge::{Domain, LinearMap, NormKind, Real, TargetSet};

pub const E: NormKind = NormKind::Euclidean;

pub fn square() -> Domain {
    Domain::unit_box(2, E)
}

/// The two opposite operators of the stock run.
pub fn stock_operators() -> Vec<LinearMap> {
    vec![
        LinearMap::from_rows(&[&[0.5, 0.0]], E, E).expect("valid matrix"),
        LinearMap::from_rows(&[&[-0.5, 0.0]], E, E).expect("valid matrix"),
    ]
}

/// A stay-adversary game on a grid of the unit square.
pub fn small_game(step: f64, rounds: usize) -> GameTranscript {
    let domain = square();
    let target = TargetSet::grid(&domain, &Real::from_f64(step)).expect("positive step");
    let mut setup = GameSetup::new(domain, target, stock_operators(), rounds, Adversary::Stay);
    setup.sup_budget = 64;
    run_game(&setup).expect("stock game is legal")
}
