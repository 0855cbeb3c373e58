//! JSON transcripts of a game. All functions of all rounds share one node
//! table, so consecutive rounds cost only the newly added patches.

use serde::{Deserialize, Serialize};

use super::{GameTranscript, PlayerMove, Round};
use crate::error::{Error, Result};
use crate::lipfun::artifact::{check_schema, NodeTable, TableWriter};
use crate::real::Real;
use crate::space::{Domain, LinearMap, Vector};

pub const GAME_SCHEMA: &str = "lipforge-game/1";

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MoveDoc {
    Previous,
    Shift { offset: Vector },
    Function { node: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundDoc {
    k: usize,
    op: usize,
    player_move: MoveDoc,
    r_offered: Real,
    r: Real,
    s: Real,
    alpha: Real,
    rho_hat: Real,
    bound: Real,
    nest_gap: Option<Real>,
    gamma: Vec<Vector>,
    f: usize,
    g: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    schema: String,
    domain: Domain,
    operators: Vec<LinearMap>,
    rounds: Vec<RoundDoc>,
    final_fn: usize,
    tail_bound: Real,
    nodes: NodeTable,
}

pub fn save_transcript(t: &GameTranscript) -> Vec<u8> {
    let mut w = TableWriter::new();
    let rounds = t
        .rounds
        .iter()
        .map(|rd| RoundDoc {
            k: rd.k,
            op: rd.op,
            player_move: match &rd.mv {
                PlayerMove::Previous => MoveDoc::Previous,
                PlayerMove::Shift(c) => MoveDoc::Shift { offset: c.clone() },
                PlayerMove::Function(f) => MoveDoc::Function { node: w.add(f) },
            },
            r_offered: rd.r_offered.clone(),
            r: rd.r.clone(),
            s: rd.s.clone(),
            alpha: rd.alpha.clone(),
            rho_hat: rd.rho_hat.clone(),
            bound: rd.bound.clone(),
            nest_gap: rd.nest_gap.clone(),
            gamma: rd.gamma.clone(),
            f: w.add(&rd.f),
            g: w.add(&rd.g),
        })
        .collect();
    let final_fn = w.add(t.final_fn());
    let doc = GameDoc {
        schema: GAME_SCHEMA.to_string(),
        domain: t.domain.clone(),
        operators: t.operators.clone(),
        rounds,
        final_fn,
        tail_bound: t.tail_bound().clone(),
        nodes: w.finish(),
    };
    let mut out = serde_json::to_vec(&doc).expect("transcripts always serialize");
    out.push(b'\n');
    out
}

pub fn load_transcript(bytes: &[u8]) -> Result<GameTranscript> {
    let value = check_schema(bytes, GAME_SCHEMA)?;
    let doc: GameDoc = serde_json::from_value(value).map_err(|e| Error::MalformedArtifact(e.to_string()))?;
    if doc.rounds.is_empty() || doc.operators.is_empty() {
        return Err(Error::MalformedArtifact("transcript has no rounds or no operators".into()));
    }
    let domain = Domain::new(doc.domain.shape().clone(), doc.domain.norm())
        .map_err(|e| Error::MalformedArtifact(e.to_string()))?;
    let operators = doc
        .operators
        .iter()
        .map(|m| LinearMap::new(m.rows(), m.cols(), m.entries().to_vec(), m.in_norm(), m.out_norm()))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::MalformedArtifact(e.to_string()))?;
    let built = doc.nodes.load()?;
    let mut rounds = Vec::with_capacity(doc.rounds.len());
    for (i, rd) in doc.rounds.into_iter().enumerate() {
        if rd.k != i + 1 || rd.op >= operators.len() {
            return Err(Error::MalformedArtifact(format!("round {} is out of sequence", i + 1)));
        }
        let mv = match rd.player_move {
            MoveDoc::Previous => PlayerMove::Previous,
            MoveDoc::Shift { offset } => PlayerMove::Shift(offset),
            MoveDoc::Function { node } => PlayerMove::Function(doc.nodes.get(&built, node)?),
        };
        rounds.push(Round {
            k: rd.k,
            op: rd.op,
            mv,
            r_offered: rd.r_offered,
            r: rd.r,
            f: doc.nodes.get(&built, rd.f)?,
            g: doc.nodes.get(&built, rd.g)?,
            s: rd.s,
            alpha: rd.alpha,
            gamma: rd.gamma,
            rho_hat: rd.rho_hat,
            bound: rd.bound,
            nest_gap: rd.nest_gap,
        });
    }
    let t = GameTranscript { domain, operators, rounds };
    if !doc.nodes.get(&built, doc.final_fn)?.ptr_eq(t.final_fn()) || doc.tail_bound != *t.tail_bound() {
        return Err(Error::MalformedArtifact("final function or tail bound disagrees with the last round".into()));
    }
    Ok(t)
}
