use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use lipforge::game::{
    check_witnesses, check_witnesses_on, load_transcript, run_game, save_transcript, witnesses, Adversary, GameSetup,
    GameTranscript, GAME_SCHEMA,
};
use lipforge::lipfun::artifact::{deserialize, serialize, FUN_SCHEMA};
use lipforge::lipfun::{check_patch_continuity, max_difference_quotient, Kind, CONTINUITY_TOL, LIP_TOL};
use lipforge::nets::nested_nets;
use lipforge::perturb::linearize_near;
use lipforge::probe::{dini_empty_certificate, dq_error, dq_profile, report_csv, ProbeRow, ScaleLadder, DINI_TOL};
use lipforge::real::{bits_for_scale, with_min_precision};
use lipforge::space::norm;
use lipforge::{Domain, LinearMap, LipFun, NormKind, Real, TargetSet, Vector};

use crate::config::{self, ProbeSpec, Run};
use crate::plot;

/// Options shared by all subcommands.
pub struct Global {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub plot: bool,
}

impl Global {
    fn run(&self) -> Result<Run> {
        let path = self.config.as_ref().ok_or_else(|| anyhow!("this command needs --config"))?;
        config::load(path)
    }

    fn optional_run(&self) -> Result<Option<Run>> {
        self.config.as_ref().map(|p| config::load(p)).transpose()
    }

    fn out_dir(&self, run: Option<&Run>) -> Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .or_else(|| run.and_then(|r| r.out_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("lipforge-out"));
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }

    fn seed(&self, run: Option<&Run>) -> u64 {
        self.seed.or(run.map(|r| r.game.seed)).unwrap_or(0)
    }
}

pub fn read_artifact(path: &Path) -> Result<Vec<u8>> {
    if !path.is_file() {
        bail!("artifact not found: {}", path.display());
    }
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let p = dir.join(name);
    fs::write(&p, bytes).with_context(|| format!("cannot write {}", p.display()))?;
    Ok(p)
}

fn op_name(i: usize) -> String {
    format!("L{}", i + 1)
}

pub fn construct(g: &Global, replay: Option<&Path>) -> Result<()> {
    let run = g.run()?;
    let seed = g.seed(Some(&run));
    let adversary = match (replay, run.game.adversary.as_str()) {
        (Some(p), _) => Adversary::Replay(load_transcript(&read_artifact(p)?)?.offers()),
        (None, "jitter") => Adversary::Jitter { seed },
        (None, _) => Adversary::Stay,
    };
    let mut setup = GameSetup::new(run.domain.clone(), run.target.clone(), run.operators.clone(), run.game.rounds, adversary);
    setup.initial_radius = run.initial_radius.clone();
    setup.sup_budget = run.game.sup_budget;
    setup.seed = seed;
    let start = Instant::now();
    let t = run_game(&setup)?;
    log::info!("game finished in {:.2}s", start.elapsed().as_secs_f64());
    let dir = g.out_dir(Some(&run))?;
    let nets = nested_nets(&run.target, &run.domain, run.game.rounds as u32)?;
    let paths = [
        write(&dir, "transcript.json", &save_transcript(&t))?,
        write(&dir, "g.json", &serialize(t.final_fn()))?,
        write(&dir, "nets.csv", nets.to_csv().as_bytes())?,
    ];
    println!("rounds: {}", t.rounds.len());
    for rd in &t.rounds {
        println!(
            "round {}: {} centers, {}, r = {}, alpha = {}, s = {}",
            rd.k,
            rd.gamma.len(),
            op_name(rd.op),
            rd.r.display_short(),
            rd.alpha.display_short(),
            rd.s.display_short()
        );
    }
    println!("tail bound s_K = {}", t.tail_bound().display_short());
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn parse_point(s: &[String]) -> Result<Vector> {
    config::vector("--point", s)
}

/// `a,b;c,d` as a 2x2 matrix.
fn parse_op(s: &str, in_norm: NormKind, out_norm: NormKind) -> Result<LinearMap> {
    let rows: Vec<Vec<String>> = s.split(';').map(|r| r.split(',').map(|x| x.trim().to_string()).collect()).collect();
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        bail!("--op: rows must have equal length");
    }
    let entries = rows.iter().flatten().map(|x| config::real("--op", x)).collect::<Result<Vec<_>>>()?;
    Ok(LinearMap::new(rows.len(), cols, entries, in_norm, out_norm)?)
}

fn ladder_at(domain: &Domain, x: &Vector, p: &ProbeSpec, ratio: &Real, seed: u64) -> Result<ScaleLadder> {
    let margin = domain.dist_to_boundary(x)?;
    Ok(ScaleLadder::geometric(&(margin / Real::from_i64(2)), ratio, p.ladder_steps, p.budget, seed)?)
}

pub struct ProbeArgs<'a> {
    pub artifact: Option<&'a Path>,
    pub transcript: Option<&'a Path>,
    pub point: &'a [String],
    pub op: Option<&'a str>,
}

pub fn probe(g: &Global, a: &ProbeArgs) -> Result<()> {
    let run = g.optional_run()?;
    let seed = g.seed(run.as_ref());
    let spec = run.as_ref().map(|r| &r.probe).cloned().unwrap_or_default();
    let ratio = run.as_ref().map_or(Real::ratio(1, 2), |r| r.ladder_ratio.clone());
    let dir = g.out_dir(run.as_ref())?;
    let f = a.artifact.map(|p| -> Result<LipFun> { Ok(deserialize(&read_artifact(p)?)?) }).transpose()?;
    match a.transcript {
        Some(tp) => {
            let t = load_transcript(&read_artifact(tp)?)?;
            let f = f.unwrap_or_else(|| t.final_fn().clone());
            let direction = run.as_ref().and_then(|r| r.direction.clone());
            probe_transcript(g, &t, &f, &spec, &ratio, direction, seed, &dir)
        }
        None => {
            let f = f.ok_or_else(|| anyhow!("probe needs --artifact, --transcript or both"))?;
            let domain = match &run {
                Some(r) => r.domain.clone(),
                None => Domain::unit_box(f.in_dim(), NormKind::Euclidean),
            };
            let out_norm = run.as_ref().map_or(NormKind::Euclidean, |r| r.operators[0].out_norm());
            let x = parse_point(a.point)?;
            let l = parse_op(a.op.ok_or_else(|| anyhow!("--op is required without a transcript"))?, domain.norm(), out_norm)?;
            let ladder = ladder_at(&domain, &x, &spec, &ratio, seed)?;
            let prof = dq_profile(&f, &domain, &x, &l, &ladder)?;
            let rows: Vec<ProbeRow> = prof
                .values
                .iter()
                .map(|(r, v)| ProbeRow { x: x.clone(), op: "L".into(), scale: r.clone(), value: v.clone() })
                .collect();
            let csv = write(&dir, "probe.csv", report_csv(&rows).as_bytes())?;
            let summary = format!("membership score (min over {} scales): {}\n", rows.len(), prof.score.display_short());
            print!("{summary}");
            write(&dir, "summary.txt", summary.as_bytes())?;
            if g.plot {
                let series = vec![("L".to_string(), plot::log_points(&prof.values))];
                println!("wrote {}", write(&dir, "probe.svg", plot::loglog_svg("dq error vs scale", &series).as_bytes())?.display());
            }
            println!("wrote {}", csv.display());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn probe_transcript(
    g: &Global,
    t: &GameTranscript,
    f: &LipFun,
    spec: &ProbeSpec,
    ratio: &Real,
    direction: Option<Vector>,
    seed: u64,
    dir: &Path,
) -> Result<()> {
    if f.in_dim() != t.domain.dim() || f.out_dim() != t.operators[0].rows() {
        bail!("artifact dimensions do not match the transcript");
    }
    let ws = witnesses(t, spec.per_round, seed)?;
    let checks = check_witnesses_on(f, t, &ws, spec.budget, seed)?;
    let rows: Vec<ProbeRow> = checks
        .iter()
        .map(|c| ProbeRow {
            x: c.witness.x.clone(),
            op: op_name(c.witness.op),
            scale: c.witness.alpha.clone(),
            value: c.value.clone(),
        })
        .collect();
    let csv = write(dir, "probe.csv", report_csv(&rows).as_bytes())?;
    let met = checks.iter().filter(|c| c.holds()).count();
    let mut summary = format!(
        "witnesses meeting 4/k: {met}/{} ({:.1}%)\n",
        checks.len(),
        100.0 * met as f64 / checks.len().max(1) as f64
    );
    if f.out_dim() == 1 {
        let v = direction.unwrap_or_else(|| Vector::basis(t.domain.dim(), 0));
        let (mut total, mut fired) = (0, 0);
        for rd in t.rounds.iter().filter(|r| r.k >= 4) {
            for x in &rd.gamma {
                let ladder = ladder_at(&t.domain, x, spec, ratio, seed)?.with_injected(&t.scales_at(x))?;
                total += 1;
                fired += dini_empty_certificate(f, &t.domain, x, &v, &ladder, DINI_TOL)?.fires as usize;
            }
        }
        if total > 0 {
            summary += &format!(
                "dini certificates fired (k >= 4): {fired}/{total} ({:.1}%)\n",
                100.0 * fired as f64 / total as f64
            );
        } else {
            summary += "dini certificates fired (k >= 4): no witnesses\n";
        }
    }
    print!("{summary}");
    write(dir, "summary.txt", summary.as_bytes())?;
    if g.plot {
        let mut series = Vec::new();
        for rd in &t.rounds {
            if let Some(x) = rd.gamma.first() {
                let ladder = ladder_at(&t.domain, x, spec, ratio, seed)?.with_injected(&t.scales_at(x))?;
                let prof = dq_profile(f, &t.domain, x, &t.operators[rd.op], &ladder)?;
                series.push((format!("k={} {}", rd.k, op_name(rd.op)), plot::log_points(&prof.values)));
            }
        }
        let svg = plot::loglog_svg("dq error vs scale at the first center of each round", &series);
        println!("wrote {}", write(dir, "probe.svg", svg.as_bytes())?.display());
    }
    println!("wrote {}", csv.display());
    if met < checks.len() {
        bail!("{} witnesses exceed the 4/k bound", checks.len() - met);
    }
    Ok(())
}

pub fn eval(g: &Global, artifact: &Path, step: &str) -> Result<()> {
    let run = g.optional_run()?;
    let f = deserialize(&read_artifact(artifact)?)?;
    let domain = match &run {
        Some(r) => r.domain.clone(),
        None => Domain::unit_box(f.in_dim(), NormKind::Euclidean),
    };
    if domain.dim() != f.in_dim() {
        bail!("artifact takes {} coordinates but the domain has {}", f.in_dim(), domain.dim());
    }
    let TargetSet::Points(points) = TargetSet::grid(&domain, &config::real("--step", step)?)? else {
        unreachable!("grids are point sets")
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=f.in_dim()).map(|i| format!("x{i}")).collect();
    header.extend((1..=f.out_dim()).map(|i| format!("y{i}")));
    w.write_record(&header)?;
    for p in &points {
        let y = f.eval(p)?;
        w.write_record(p.coords().iter().chain(y.coords()).map(Real::display_short))?;
    }
    let dir = g.out_dir(run.as_ref())?;
    let path = write(&dir, "eval.csv", &w.into_inner()?)?;
    println!("evaluated {} points", points.len());
    println!("wrote {}", path.display());
    Ok(())
}

pub fn net(g: &Global, levels: Option<u32>) -> Result<()> {
    let run = g.run()?;
    let k_max = levels.unwrap_or(run.game.rounds as u32);
    let nets = nested_nets(&run.target, &run.domain, k_max)?;
    if let Err(e) = nets.check(&run.target, &run.domain) {
        bail!("net invariant violated: {e}");
    }
    for k in 1..=nets.k_max() {
        println!("level {k}: {} points", nets.level(k).len());
    }
    let dir = g.out_dir(Some(&run))?;
    println!("wrote {}", write(&dir, "nets.csv", nets.to_csv().as_bytes())?.display());
    Ok(())
}

/// Outcome of one verification suite.
struct Suite {
    name: &'static str,
    result: std::result::Result<String, String>,
}

fn suite(name: &'static str, f: impl FnOnce() -> Result<std::result::Result<String, String>>) -> Suite {
    let result = f().unwrap_or_else(|e| Err(format!("{e:#}")));
    Suite { name, result }
}

pub fn verify(g: &Global, artifact: Option<&Path>) -> Result<()> {
    let run = g.optional_run()?;
    let seed = g.seed(run.as_ref());
    let suites = match artifact {
        None => stock_suites(seed),
        Some(p) => {
            let bytes = read_artifact(p)?;
            let schema = lipforge::lipfun::artifact::check_schema(&bytes, FUN_SCHEMA)
                .map(|_| FUN_SCHEMA)
                .or_else(|_| lipforge::lipfun::artifact::check_schema(&bytes, GAME_SCHEMA).map(|_| GAME_SCHEMA));
            match schema {
                Ok(FUN_SCHEMA) => function_suites(&bytes, run.as_ref().map(|r| &r.domain), seed),
                Ok(_) => transcript_suites(&bytes, seed),
                Err(e) => vec![Suite { name: "structure", result: Err(e.to_string()) }],
            }
        }
    };
    let mut first_failure = None;
    for s in &suites {
        match &s.result {
            Ok(detail) => println!("suite {}: PASS ({detail})", s.name),
            Err(why) => {
                println!("suite {}: FAIL ({why})", s.name);
                first_failure.get_or_insert_with(|| format!("{}: {why}", s.name));
            }
        }
    }
    match first_failure {
        Some(f) => bail!("verification failed in suite {f}"),
        None => Ok(()),
    }
}

fn stock_suites(seed: u64) -> Vec<Suite> {
    let e = NormKind::Euclidean;
    let square = Domain::unit_box(2, e);
    let ops = || {
        vec![
            LinearMap::from_rows(&[&[0.5, 0.0]], e, e).expect("valid matrix"),
            LinearMap::from_rows(&[&[-0.5, 0.0]], e, e).expect("valid matrix"),
        ]
    };
    let mut out = vec![
        suite("blend", || {
            let mut worst = 0.0f64;
            for (a, b) in [(0.1, 0.3), (0.25, 0.5), (0.5, 2.0)] {
                let f1 = LipFun::scale(Real::from_f64(0.5), &LipFun::norm_of(2, -1, e));
                let f2 = LipFun::linear(LinearMap::from_rows(&[&[0.3, -0.2]], e, e)?);
                let phi = LipFun::radial_blend(Real::from_f64(a), Real::from_f64(b), &f1, &f2, e)?;
                for i in 0..200 {
                    let t = (i as f64 + 0.5) / 200.0 * 3.0 * b;
                    let ang = i as f64 * 2.399963;
                    let x = Vector::from_f64(&[t * ang.cos(), t * ang.sin()]);
                    let n = norm(&x, e).to_f64();
                    let y = phi.eval(&x)?;
                    let want = if n <= a { f1.eval(&x)? } else if n >= b { f2.eval(&x)? } else { continue };
                    worst = worst.max(norm(&y.sub(&want), e).to_f64());
                }
            }
            Ok(if worst <= 1e-12 { Ok(format!("identity error {worst:.1e}")) } else { Err(format!("blend identity error {worst:e}")) })
        }),
        suite("lipschitz", || {
            let f1 = LipFun::scale(Real::from_f64(0.5), &LipFun::norm_of(2, -1, e));
            let f2 = LipFun::linear(LinearMap::from_rows(&[&[0.3, -0.2]], e, e)?);
            let phi = LipFun::radial_blend(Real::from_f64(0.2), Real::from_f64(0.4), &f1, &f2, e)?;
            let shifted = LipFun::precompose(
                &phi,
                &LipFun::affine(Vector::zeros(2), LinearMap::identity(2, e), Vector::from_f64(&[0.5, 0.5]))?,
            )?;
            let q = max_difference_quotient(&shifted, &square, e, 2000, &[], seed)?;
            let cert = shifted.lip_cert();
            Ok(if q <= cert + 1e-9 { Ok(format!("max quotient {q:.6} <= certificate {cert:.6}")) } else { Err(format!("quotient {q:.3e} exceeds certificate {cert:.6}")) })
        }),
        suite("nets", || {
            let target = TargetSet::grid(&square, &Real::from_f64(0.125))?;
            let nets = nested_nets(&target, &square, 4)?;
            if let Err(why) = nets.check(&target, &square) {
                return Ok(Err(why));
            }
            let addable: usize = (1..=4).map(|k| nets.addable(&target, &square, k).len()).sum();
            Ok(if addable == 0 { Ok("4 levels, invariants and maximality hold".into()) } else { Err(format!("{addable} addable points")) })
        }),
        suite("perturb", || {
            let f = LipFun::scale(Real::from_f64(0.5), &LipFun::norm_of(2, 1, e));
            let gamma = [Vector::from_f64(&[0.25, 0.25]), Vector::from_f64(&[0.75, 0.5])];
            let l = &ops()[0];
            let out = linearize_near(&f, &gamma, l, &Real::from_f64(0.25), &square)?;
            let mut worst = 0.0f64;
            for x in &gamma {
                worst = worst.max(dq_error(&out.g, &square, x, l, &out.alpha, 33, seed)?.to_f64());
            }
            Ok(if worst <= 1e-9 { Ok(format!("linearity residual {worst:.1e}")) } else { Err(format!("linearity residual {worst:e}")) })
        }),
    ];
    let game = (|| -> Result<GameTranscript> {
        let target = TargetSet::grid(&square, &Real::from_f64(0.125))?;
        let mut setup = GameSetup::new(square.clone(), target, ops(), 3, Adversary::Stay);
        setup.sup_budget = 64;
        setup.seed = seed;
        Ok(run_game(&setup)?)
    })();
    match game {
        Ok(t) => out.extend(transcript_checks(&t, seed)),
        Err(e) => out.push(Suite { name: "nesting", result: Err(format!("{e:#}")) }),
    }
    out
}

fn transcript_checks(t: &GameTranscript, seed: u64) -> Vec<Suite> {
    vec![
        suite("nesting", || Ok(t.check_nesting().map(|_| format!("{} rounds nest", t.rounds.len())))),
        suite("exactness", || {
            let mut worst = 0.0f64;
            let mut count = 0;
            for rd in &t.rounds {
                for x in &rd.gamma {
                    worst = worst.max(dq_error(&rd.g, &t.domain, x, &t.operators[rd.op], &rd.alpha, 9, seed)?.to_f64());
                    count += 1;
                }
            }
            Ok(if worst <= 1e-9 {
                Ok(format!("g_k affine on B(x, alpha_k) at {count} centers, residual {worst:.1e}"))
            } else {
                Err(format!("linearity residual {worst:e}"))
            })
        }),
        suite("witnesses", || {
            let ws = witnesses(t, 1, seed)?;
            let checks = check_witnesses(t, &ws, 17, seed)?;
            let bad = checks.iter().filter(|c| !c.holds()).count();
            Ok(if bad == 0 { Ok(format!("{} centers meet 4/k", checks.len())) } else { Err(format!("{bad} witnesses exceed 4/k")) })
        }),
        suite("continuity", || continuity(t.final_fn(), seed)),
    ]
}

fn continuity(f: &LipFun, seed: u64) -> Result<std::result::Result<String, String>> {
    let rep = check_patch_continuity(f, 2 * f.in_dim() + 2, seed)?;
    let worst = rep.worst.map_or(0.0, |(_, g)| g);
    Ok(if worst <= CONTINUITY_TOL {
        Ok(format!("{} patches in {} nodes, largest gap {worst:.1e}", rep.patches, rep.nodes))
    } else {
        Err(format!("patch boundary gap {worst:e} exceeds {CONTINUITY_TOL:e}"))
    })
}

fn transcript_suites(bytes: &[u8], seed: u64) -> Vec<Suite> {
    match load_transcript(bytes) {
        Ok(t) => {
            let mut v = vec![Suite { name: "structure", result: Ok(format!("{} rounds", t.rounds.len())) }];
            v.extend(transcript_checks(&t, seed));
            v
        }
        Err(e) => vec![Suite { name: "structure", result: Err(e.to_string()) }],
    }
}

fn function_suites(bytes: &[u8], domain: Option<&Domain>, seed: u64) -> Vec<Suite> {
    let f = match deserialize(bytes) {
        Ok(f) => f,
        Err(e) => return vec![Suite { name: "structure", result: Err(e.to_string()) }],
    };
    let domain = domain.cloned().unwrap_or_else(|| Domain::unit_box(f.in_dim(), NormKind::Euclidean));
    let mut v = vec![Suite { name: "structure", result: Ok(format!("{} nodes, {}", f.node_count(), f.kind_name())) }];
    if domain.dim() != f.in_dim() {
        v.push(Suite { name: "lipschitz", result: Err("domain dimension does not match the artifact".into()) });
        return v;
    }
    v.push(suite("continuity", || continuity(&f, seed)));
    v.push(suite("lipschitz", || {
        let focus = patch_focus(&f);
        let mag = Real::one();
        let q = with_min_precision(focus.iter().map(|(_, r)| bits_for_scale(r, &mag)).max().unwrap_or(0), || {
            max_difference_quotient(&f, &domain, NormKind::Euclidean, 2000, &focus, seed)
        })?;
        let cert = f.lip_cert();
        Ok(if q <= cert * (1.0 + LIP_TOL) + 1e-9 {
            Ok(format!("max quotient {q:.9} <= certificate {cert:.9}"))
        } else {
            Err(format!("sampled quotient {q:.3e} exceeds certificate {cert:.9}"))
        })
    }));
    v
}

/// Patch centers and radii of every patched node, for focused sampling.
fn patch_focus(f: &LipFun) -> Vec<(Vector, Real)> {
    let mut out = Vec::new();
    for node in f.nodes_postorder() {
        if let Kind::Patched { patches, .. } = node.kind() {
            out.extend(patches.iter().map(|p| (p.center.clone(), p.radius.clone())));
        }
    }
    out
}
