//! Run configuration, read from TOML. Decimals are strings so that they are
//! parsed exactly and independently of locale.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lipforge::{Domain, LinearMap, NormKind, Real, TargetSet, Vector};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub target: TargetSpec,
    #[serde(default)]
    pub codomain: CodomainSpec,
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub game: GameSpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: String,
    pub lo: Option<Vec<String>>,
    pub hi: Option<Vec<String>>,
    pub center: Option<Vec<String>>,
    pub radius: Option<String>,
    #[serde(default)]
    pub norm: NormKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// Grid step of a box domain.
    pub grid: Option<String>,
    /// CSV of points with a header row.
    pub points: Option<PathBuf>,
    /// Size of a low-discrepancy sample of the domain.
    pub sample: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodomainSpec {
    #[serde(default)]
    pub norm: NormKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameSpec {
    pub rounds: usize,
    pub adversary: String,
    pub seed: u64,
    pub initial_radius: String,
    pub sup_budget: usize,
}

impl Default for GameSpec {
    fn default() -> Self {
        GameSpec { rounds: 8, adversary: "stay".into(), seed: 0, initial_radius: "1".into(), sup_budget: 256 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSpec {
    /// Witnesses per net center: the center and `per_round - 1` nearby points.
    pub per_round: usize,
    pub budget: usize,
    pub ladder_steps: usize,
    pub ladder_ratio: String,
    /// Dini direction; the first basis vector when absent.
    pub direction: Option<Vec<String>>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { per_round: 1, budget: 33, ladder_steps: 20, ladder_ratio: "0.5".into(), direction: None }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

/// Parsed and validated configuration.
#[derive(Debug)]
pub struct Run {
    pub domain: Domain,
    pub target: TargetSet,
    pub operators: Vec<LinearMap>,
    pub game: GameSpec,
    pub initial_radius: Real,
    pub probe: ProbeSpec,
    pub ladder_ratio: Real,
    pub direction: Option<Vector>,
    pub out_dir: Option<PathBuf>,
}

pub fn real(field: &str, s: &str) -> Result<Real> {
    let r: Real = s.parse().map_err(|e| anyhow!("{field}: {e}"))?;
    if !r.is_finite() {
        bail!("{field}: expected a finite number, got {s:?}");
    }
    Ok(r)
}

pub fn vector(field: &str, xs: &[String]) -> Result<Vector> {
    let coords = xs.iter().enumerate().map(|(i, x)| real(&format!("{field}[{i}]"), x)).collect::<Result<Vec<_>>>()?;
    if coords.is_empty() {
        bail!("{field}: empty vector");
    }
    Ok(Vector::new(coords))
}

/// Operator from rows of decimals, rejecting norms of one or more.
pub fn operator(field: &str, rows: &[Vec<String>], in_norm: NormKind, out_norm: NormKind) -> Result<LinearMap> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        bail!("{field}: rows must be nonempty and of equal length");
    }
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            entries.push(real(&format!("{field}.rows[{i}][{j}]"), x)?);
        }
    }
    let m = LinearMap::new(rows.len(), cols, entries, in_norm, out_norm).with_context(|| field.to_string())?;
    let n = m.op_norm().with_context(|| field.to_string())?;
    if n >= 1.0 {
        bail!("operator norm must be < 1 ({field} has norm {n})");
    }
    Ok(m)
}

fn read_points(path: &Path, d: usize) -> Result<Vec<Vector>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("target.points: cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let xs: Vec<String> = rec.iter().map(str::to_string).collect();
        if xs.len() != d {
            bail!("{}: row {} has {} coordinates, expected {d}", path.display(), i + 2, xs.len());
        }
        out.push(vector(&format!("{} row {}", path.display(), i + 2), &xs)?);
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Run> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse(&text, base).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse(text: &str, base: &Path) -> Result<Run> {
    let cfg: RunConfig = toml::from_str(text)?;
    let norm = cfg.domain.norm;
    let domain = match cfg.domain.shape.as_str() {
        "box" => {
            let lo = vector("domain.lo", cfg.domain.lo.as_deref().ok_or_else(|| anyhow!("domain.lo: missing"))?)?;
            let hi = vector("domain.hi", cfg.domain.hi.as_deref().ok_or_else(|| anyhow!("domain.hi: missing"))?)?;
            Domain::new_box(lo, hi, norm).context("domain")?
        }
        "ball" => {
            let c = vector("domain.center", cfg.domain.center.as_deref().ok_or_else(|| anyhow!("domain.center: missing"))?)?;
            let r = real("domain.radius", cfg.domain.radius.as_deref().ok_or_else(|| anyhow!("domain.radius: missing"))?)?;
            Domain::new_ball(c, r, norm).context("domain")?
        }
        other => bail!("domain.shape: expected \"box\" or \"ball\", got {other:?}"),
    };
    let d = domain.dim();
    let t = &cfg.target;
    let target = match (&t.grid, &t.points, t.sample) {
        (Some(step), None, None) => TargetSet::grid(&domain, &real("target.grid", step)?).context("target.grid")?,
        (None, Some(p), None) => TargetSet::Points(read_points(&base.join(p), d)?),
        (None, None, Some(n)) => TargetSet::Sampled { count: n, seed: cfg.game.seed, keep: None },
        _ => bail!("target: give exactly one of grid, points, sample"),
    };
    if cfg.operators.is_empty() {
        bail!("operators: at least one operator is required");
    }
    let operators = cfg
        .operators
        .iter()
        .enumerate()
        .map(|(i, o)| operator(&format!("operators[{i}]"), &o.rows, norm, cfg.codomain.norm))
        .collect::<Result<Vec<_>>>()?;
    let l = operators[0].rows();
    if let Some(i) = operators.iter().position(|o| o.cols() != d || o.rows() != l) {
        bail!("operators[{i}]: expected a {l}x{d} matrix");
    }
    if cfg.game.rounds == 0 {
        bail!("game.rounds: must be at least 1");
    }
    if !["stay", "jitter"].contains(&cfg.game.adversary.as_str()) {
        bail!("game.adversary: expected \"stay\" or \"jitter\", got {:?}", cfg.game.adversary);
    }
    let initial_radius = real("game.initial_radius", &cfg.game.initial_radius)?;
    let ladder_ratio = real("probe.ladder_ratio", &cfg.probe.ladder_ratio)?;
    let direction = cfg.probe.direction.as_deref().map(|v| vector("probe.direction", v)).transpose()?;
    if direction.as_ref().is_some_and(|v| v.dim() != d) {
        bail!("probe.direction: expected {d} coordinates");
    }
    if cfg.probe.per_round == 0 {
        bail!("probe.per_round: must be at least 1");
    }
    Ok(Run {
        domain,
        target,
        operators,
        game: cfg.game,
        initial_radius,
        probe: cfg.probe,
        ladder_ratio,
        direction,
        out_dir: cfg.output.dir,
    })
}
