//! Banach–Mazur game on 1-Lipschitz maps.
//!
//! Player I offers a ball `(f_k, r_k)` inside the previous one; Player II
//! answers with `g_k`, affine with derivative `L_n(k)` on tiny balls around
//! the net `Gamma_k`, and a radius `s_k` small enough that every later ball
//! keeps that local behaviour up to `4/k`.

mod transcript;

pub use transcript::{GAME_SCHEMA, load_transcript, save_transcript};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lipfun::{sup_dist, LipFun};
use crate::nets::{nested_nets, NetFamily, TargetSet};
use crate::perturb::linearize_near;
use crate::probe::dq_error;
use crate::real::{bits_for_scale, with_min_precision, Real};
use crate::space::{norm, sample_ball, Domain, LinearMap, NormKind, Vector};

/// Player I's function, relative to Player II's last answer when possible so
/// that transcripts replay without re-deriving shared structure.
#[derive(Debug, Clone)]
pub enum PlayerMove {
    /// `f_k = g_(k-1)`
    Previous,
    /// `f_k = g_(k-1) + offset`
    Shift(Vector),
    Function(LipFun),
}

#[derive(Debug, Clone)]
pub struct Offer {
    pub mv: PlayerMove,
    pub r: Real,
}

/// Scripted Player I.
#[derive(Debug, Clone)]
pub enum Adversary {
    /// `(g_(k-1), s_(k-1)/2)`
    Stay,
    /// `(g_(k-1) + c, s_(k-1)/4)` with a seeded constant `||c|| ≤ s_(k-1)/4`.
    Jitter { seed: u64 },
    /// Moves read back from a transcript, rounds 1, 2, ...
    Replay(Vec<Offer>),
}

impl Adversary {
    pub fn name(&self) -> &'static str {
        match self {
            Adversary::Stay => "stay",
            Adversary::Jitter { .. } => "jitter",
            Adversary::Replay(_) => "replay",
        }
    }
}

/// Everything needed to play a game.
#[derive(Debug, Clone)]
pub struct GameSetup {
    pub domain: Domain,
    pub target: TargetSet,
    pub operators: Vec<LinearMap>,
    pub rounds: usize,
    pub adversary: Adversary,
    /// Player I's first ball.
    pub initial: LipFun,
    pub initial_radius: Real,
    /// Halton points per `sup_dist` estimate.
    pub sup_budget: usize,
    pub seed: u64,
}

impl GameSetup {
    /// Zero map with radius one as the opening ball.
    pub fn new(domain: Domain, target: TargetSet, operators: Vec<LinearMap>, rounds: usize, adversary: Adversary) -> Self {
        let (d, l) = (domain.dim(), operators.first().map_or(1, LinearMap::rows));
        GameSetup {
            domain,
            target,
            operators,
            rounds,
            adversary,
            initial: LipFun::zero(d, l),
            initial_radius: Real::one(),
            sup_budget: 256,
            seed: 0,
        }
    }
}

/// One completed round.
#[derive(Debug, Clone)]
pub struct Round {
    pub k: usize,
    /// Index of `L_n(k)` in the operator list.
    pub op: usize,
    pub mv: PlayerMove,
    pub r_offered: Real,
    /// Radius after shrinking to `2^-k (1 - ||L||)`.
    pub r: Real,
    pub f: LipFun,
    pub g: LipFun,
    pub s: Real,
    pub alpha: Real,
    pub gamma: Vec<Vector>,
    /// Sampled `||g_k - f_k||`.
    pub rho_hat: Real,
    /// Certified bound on `||g_k - f_k||`.
    pub bound: Real,
    /// Sampled `||f_k - g_(k-1)||`, absent in round one.
    pub nest_gap: Option<Real>,
}

#[derive(Debug, Clone)]
pub struct GameTranscript {
    pub domain: Domain,
    pub operators: Vec<LinearMap>,
    pub rounds: Vec<Round>,
}

impl GameTranscript {
    /// `g_K`.
    pub fn final_fn(&self) -> &LipFun {
        &self.rounds.last().expect("transcripts have at least one round").g
    }

    /// `s_K`, bounding the distance from `g_K` to the limit of the game.
    pub fn tail_bound(&self) -> &Real {
        &self.rounds.last().expect("transcripts have at least one round").s
    }

    pub fn out_norm(&self) -> NormKind {
        self.operators[0].out_norm()
    }

    /// Scales `alpha_j` of the rounds whose net contains `x`.
    pub fn scales_at(&self, x: &Vector) -> Vec<Real> {
        self.rounds.iter().filter(|r| r.gamma.contains(x)).map(|r| r.alpha.clone()).collect()
    }

    /// Player I's moves, for replay.
    pub fn offers(&self) -> Vec<Offer> {
        self.rounds.iter().map(|r| Offer { mv: r.mv.clone(), r: r.r_offered.clone() }).collect()
    }

    /// Checks `s_k < alpha_k / k`, `r_k ≤ 2^-k (1 - ||L||)`, the sampled
    /// nesting inequalities and strictly decreasing radii.
    pub fn check_nesting(&self) -> std::result::Result<(), String> {
        for (i, rd) in self.rounds.iter().enumerate() {
            let k = rd.k;
            if rd.s >= &rd.alpha / Real::from_i64(k as i64) {
                return Err(format!("round {k}: s_k is not below alpha_k/k"));
            }
            let cap = schedule_cap(k, &self.operators[rd.op]).map_err(|e| e.to_string())?;
            if rd.r > cap {
                return Err(format!("round {k}: r_k exceeds 2^-k (1 - ||L||)"));
            }
            if &rd.rho_hat + &rd.s > rd.r || &rd.bound + &rd.s > rd.r {
                return Err(format!("round {k}: B(g_k, s_k) is not inside B(f_k, r_k)"));
            }
            if i > 0 {
                let prev = &self.rounds[i - 1];
                let gap = rd.nest_gap.clone().unwrap_or_else(Real::zero);
                if &gap + &rd.r > prev.s {
                    return Err(format!("round {k}: B(f_k, r_k) is not inside B(g_(k-1), s_(k-1))"));
                }
                if rd.s >= prev.s {
                    return Err(format!("round {k}: s_k does not decrease"));
                }
            }
        }
        Ok(())
    }
}

/// `n(k) - 1` for the round-robin schedule over `m` operators.
pub fn schedule(k: usize, m: usize) -> usize {
    (k - 1) % m
}

fn schedule_cap(k: usize, l: &LinearMap) -> Result<Real> {
    let op = Real::from_f64(l.op_norm()?);
    Ok(Real::pow2(-(k as i32)) * (Real::one() - op))
}

/// Game position before round `k`.
#[derive(Debug, Clone)]
pub struct GameState {
    pub k: usize,
    pub domain: Domain,
    pub nets: NetFamily,
    pub operators: Vec<LinearMap>,
    /// `(g_(k-1), s_(k-1))`
    pub previous: Option<(LipFun, Real)>,
    pub sup_budget: usize,
    pub seed: u64,
}

impl GameState {
    pub fn operator(&self) -> (usize, &LinearMap) {
        let i = schedule(self.k, self.operators.len());
        (i, &self.operators[i])
    }

    fn out_norm(&self) -> NormKind {
        self.operators[0].out_norm()
    }

    /// Player I's function for a move.
    pub fn resolve(&self, mv: &PlayerMove) -> Result<LipFun> {
        match (mv, &self.previous) {
            (PlayerMove::Function(f), _) => Ok(f.clone()),
            (PlayerMove::Previous, Some((g, _))) => Ok(g.clone()),
            (PlayerMove::Shift(c), Some((g, _))) => LipFun::add_const(g, c.clone()),
            (_, None) => Err(Error::InvalidArgument("the first move must name a function".into())),
        }
    }
}

/// Accepts Player I's ball and shrinks its radius to `2^-k (1 - ||L_n(k)||)`.
/// Returns the shrunk radius and the sampled distance to the previous answer.
pub fn validate_move(state: &GameState, f: &LipFun, r: &Real) -> Result<(Real, Option<Real>)> {
    if *r <= Real::zero() {
        return Err(Error::NonPositiveRadius);
    }
    if !f.is_one_lipschitz() {
        return Err(Error::NotOneLipschitz(f.lip_cert()));
    }
    let gap = match &state.previous {
        None => None,
        Some((g, s)) => {
            let gap = sup_dist(f, g, &state.domain, state.out_norm(), state.sup_budget, state.seed)?;
            if &gap + r > *s {
                return Err(Error::MoveNotNested { round: state.k });
            }
            Some(gap)
        }
    };
    let cap = schedule_cap(state.k, state.operator().1)?;
    Ok((r.min(&cap), gap))
}

/// Player II's answer `(g_k, s_k, alpha_k)` to a validated ball.
pub fn player2_move(state: &GameState, f: &LipFun, r: &Real) -> Result<(LipFun, Real, Real, Real, Real)> {
    let k = state.k;
    let gamma = state.nets.level(k);
    let two = Real::from_i64(2);
    if gamma.is_empty() {
        let alpha = r / &two;
        let s = (&alpha / Real::from_i64(k as i64 + 1)).min(&(r / &two));
        return Ok((f.clone(), s, alpha, Real::zero(), Real::zero()));
    }
    let (_, l) = state.operator();
    let lin = linearize_near(f, gamma, l, r, &state.domain)?;
    let rho = sup_dist(&lin.g, f, &state.domain, state.out_norm(), state.sup_budget, state.seed)?;
    // the certified bound is authoritative; the sample can only confirm it
    let gap = rho.max(&lin.bound);
    let s = (&lin.alpha / Real::from_i64(k as i64 + 1)).min(&((r - &gap) / &two));
    Ok((lin.g, s, lin.alpha, rho, lin.bound))
}

/// Player I's offer for the current round.
pub fn adversary_move(kind: &Adversary, state: &GameState, setup_first: &Offer) -> Result<Offer> {
    let Some((_, s)) = &state.previous else {
        return match kind {
            Adversary::Replay(moves) => moves.first().cloned().ok_or(Error::ReplayExhausted(0)),
            _ => Ok(setup_first.clone()),
        };
    };
    let four = Real::from_i64(4);
    match kind {
        Adversary::Stay => Ok(Offer { mv: PlayerMove::Previous, r: s / Real::from_i64(2) }),
        Adversary::Jitter { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(state.k as u64));
            let l = state.operators[0].rows();
            let dir = Vector::from_f64(&(0..l).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
            let n = norm(&dir, state.out_norm());
            let len = s / &four * Real::from_f64(rng.gen_range(0.0..1.0));
            let offset = if n.is_zero() { Vector::zeros(l) } else { dir.scale(&(len / n)) };
            Ok(Offer { mv: PlayerMove::Shift(offset), r: s / &four })
        }
        Adversary::Replay(moves) => moves.get(state.k - 1).cloned().ok_or(Error::ReplayExhausted(state.k - 1)),
    }
}

fn check_setup(setup: &GameSetup) -> Result<()> {
    if setup.rounds == 0 {
        return Err(Error::InvalidArgument("a game needs at least one round".into()));
    }
    if setup.operators.is_empty() {
        return Err(Error::InvalidArgument("operator list is empty".into()));
    }
    let d = setup.domain.dim();
    let l = setup.initial.out_dim();
    if setup.initial.in_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: setup.initial.in_dim() });
    }
    let out_norm = setup.operators[0].out_norm();
    for op in &setup.operators {
        if op.cols() != d || op.rows() != l {
            return Err(Error::DimensionMismatch { expected: l, found: op.rows() });
        }
        if op.out_norm() != out_norm || op.in_norm() != setup.domain.norm() {
            return Err(Error::InvalidArgument("operators must share the domain and codomain norms".into()));
        }
        let n = op.op_norm()?;
        if n >= 1.0 {
            return Err(Error::OperatorTooLarge { norm: n, limit: "1".into() });
        }
    }
    Ok(())
}

pub fn run_game(setup: &GameSetup) -> Result<GameTranscript> {
    check_setup(setup)?;
    let nets = nested_nets(&setup.target, &setup.domain, setup.rounds as u32)?;
    let mut state = GameState {
        k: 1,
        domain: setup.domain.clone(),
        nets,
        operators: setup.operators.clone(),
        previous: None,
        sup_budget: setup.sup_budget,
        seed: setup.seed,
    };
    let first = Offer { mv: PlayerMove::Function(setup.initial.clone()), r: setup.initial_radius.clone() };
    let mut rounds = Vec::with_capacity(setup.rounds);
    for k in 1..=setup.rounds {
        state.k = k;
        let round = play_round(&state, &setup.adversary, &first).map_err(|e| e.in_round(k))?;
        log::info!(
            "round {k}: |Gamma_k| = {}, r = {}, alpha = {}, s = {}",
            round.gamma.len(),
            round.r,
            round.alpha,
            round.s
        );
        state.previous = Some((round.g.clone(), round.s.clone()));
        rounds.push(round);
    }
    Ok(GameTranscript { domain: setup.domain.clone(), operators: setup.operators.clone(), rounds })
}

fn play_round(state: &GameState, adversary: &Adversary, first: &Offer) -> Result<Round> {
    let offer = adversary_move(adversary, state, first)?;
    let f = state.resolve(&offer.mv)?;
    let (r, nest_gap) = validate_move(state, &f, &offer.r)?;
    let (g, s, alpha, rho_hat, bound) = player2_move(state, &f, &r)?;
    Ok(Round {
        k: state.k,
        op: state.operator().0,
        mv: offer.mv,
        r_offered: offer.r,
        r,
        f,
        g,
        s,
        alpha,
        gamma: state.nets.level(state.k).to_vec(),
        rho_hat,
        bound,
        nest_gap,
    })
}

/// A point of `U_k` where round `k` forces the local behaviour of the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: Vector,
    pub k: usize,
    pub center: Vector,
    pub alpha: Real,
    pub s: Real,
    pub op: usize,
}

/// For every round, each net center and up to `per_round - 1` seeded points
/// of `B(center, s_k / 2)`.
pub fn witnesses(t: &GameTranscript, per_round: usize, seed: u64) -> Result<Vec<Witness>> {
    if per_round == 0 {
        return Err(Error::InvalidArgument("per_round must be at least 1".into()));
    }
    let norm = t.domain.norm();
    let mut out = Vec::new();
    for rd in &t.rounds {
        for c in &rd.gamma {
            let mk = |x: Vector| Witness { x, k: rd.k, center: c.clone(), alpha: rd.alpha.clone(), s: rd.s.clone(), op: rd.op };
            out.push(mk(c.clone()));
            if per_round > 1 {
                let half = &rd.s / Real::from_i64(2);
                let mag = c.coords().iter().fold(Real::one(), |m, x| m.max(&x.abs()));
                let budget = per_round.max(2 * c.dim() + 1);
                let pts = with_min_precision(bits_for_scale(&half, &mag), || sample_ball(c, &half, norm, budget, seed))?;
                out.extend(pts.into_iter().skip(1).take(per_round - 1).map(mk));
            }
        }
    }
    Ok(out)
}

/// Difference-quotient error of `g_K` at a witness, at the witness's scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCheck {
    pub witness: Witness,
    pub value: Real,
    /// `4/k`
    pub bound: f64,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.value.to_f64() <= self.bound + 1e-9
    }
}

/// Evaluates every witness on `g_K` in parallel; results keep the witness
/// order.
pub fn check_witnesses(t: &GameTranscript, ws: &[Witness], budget: usize, seed: u64) -> Result<Vec<WitnessCheck>> {
    check_witnesses_on(t.final_fn(), t, ws, budget, seed)
}

/// As [`check_witnesses`], for an arbitrary function on the transcript's
/// domain.
pub fn check_witnesses_on(
    g: &LipFun,
    t: &GameTranscript,
    ws: &[Witness],
    budget: usize,
    seed: u64,
) -> Result<Vec<WitnessCheck>> {
    ws.par_iter()
        .map(|w| {
            let value = dq_error(g, &t.domain, &w.x, &t.operators[w.op], &w.alpha, budget, seed)?;
            Ok(WitnessCheck { witness: w.clone(), value, bound: 4.0 / w.k as f64 })
        })
        .collect()
}
