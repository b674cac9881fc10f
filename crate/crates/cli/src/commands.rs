use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use ttc_body::alignment::{
    compare_tables, condition_average, human_condition_table, load_human_csv, load_video_meta, meta_from_scenarios,
    run_sweep_with_masks, save_video_meta, synthesize_humans, write_human_csv, write_sweep_csv, HumanResponseTable,
    SyntheticHumanConfig, VideoMeta, VideoMetaMap,
};
use ttc_body::raster::{mask_from_probability, two_largest};
use ttc_body::stimulus::{draw_rng, make_matched_pair, render_dataset, render_frame, GenError, DATASET_MANIFEST_FILE};
use ttc_body::ttc::{assign_objects, coarsen_pair, read_ttc_csv, scenario_masks, scenario_ttc, write_ttc_csv, TtcError, TtcRecord, TtcResult};
use ttc_body::{BinaryMask, CoarseningOp, GeneratorConfig, Kinematics, ProbabilityMap, Scenario, ScenarioManifest, Vec2};

use crate::{CompareArgs, Command, GenDatasetArgs, GenHumansArgs, GenScenariosArgs, MaskSourceArgs, RunTtcArgs, SweepArgs};

pub const SCENARIOS_FILE: &str = "scenarios.json";
pub const META_FILE: &str = "meta.json";
pub const HUMANS_FILE: &str = "humans.csv";
pub const TTC_FILE: &str = "ttc.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Pair construction attempts per pair before giving up.
const PAIR_RETRIES: u64 = 16;

/// A flag value that parsed but makes no sense; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::GenDataset(a) => gen_dataset(a, out),
        Command::GenScenarios(a) => gen_scenarios(a, out, err),
        Command::GenHumans(a) => gen_humans(a, out),
        Command::RunTtc(a) => run_ttc(a, out, err),
        Command::Compare(a) => compare(a, out, err),
        Command::Sweep(a) => sweep(a, out, err),
    }
}

fn provenance(command: &str, seed: Option<u64>, config: &impl Serialize) -> Result<Vec<String>> {
    Ok(vec![
        format!("ttc-body {command}"),
        format!("seed={}", seed.map_or("none".to_string(), |s| s.to_string())),
        format!("config={}", serde_json::to_string(config)?),
    ])
}

fn load_config(path: Option<&Path>, seed: u64) -> Result<GeneratorConfig> {
    let mut cfg = match path {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => GeneratorConfig::default(),
    };
    cfg.seed = seed;
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    Ok(cfg)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn parse_vec(s: &str, name: &str) -> Result<Vec2<f64>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => Ok(Vec2::new(x, y)),
            _ => usage(format!("--{name} expects two numbers `x,y`, got {s:?}")),
        },
        _ => usage(format!("--{name} expects `x,y`, got {s:?}")),
    }
}

fn parse_op(s: &str) -> Result<CoarseningOp> {
    match s.parse::<CoarseningOp>() {
        Ok(op) => Ok(op),
        Err(e) => usage(e.to_string()),
    }
}

fn gen_dataset(args: GenDatasetArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    let dir = &args.out.out;
    let manifest = render_dataset(&cfg, args.train, args.val, dir)?;
    writeln!(out, "wrote {} image/mask pairs and {}", manifest.entries.len(), dir.join(DATASET_MANIFEST_FILE).display())?;
    Ok(())
}

fn dedup_taus(taus: &[f64], err: &mut dyn Write) -> Result<Vec<f64>> {
    let mut seen = BTreeSet::new();
    let mut kept = Vec::new();
    for &t in taus {
        if !(t > 0.0 && t.is_finite()) {
            return usage(format!("tau values must be positive, got {t}"));
        }
        if seen.insert(t.to_bits()) {
            kept.push(t);
        } else {
            writeln!(err, "warning: duplicate tau {t} dropped")?;
        }
    }
    Ok(kept)
}

fn build_pair(cfg: &GeneratorConfig, kin: &Kinematics<f64>, index: u64) -> Result<(Scenario<f64>, Scenario<f64>)> {
    let pair_id = format!("pair{index:04}");
    let mut last = None;
    for retry in 0..PAIR_RETRIES {
        let mut rng = draw_rng(cfg.seed, index + (retry << 32));
        match make_matched_pair(cfg, kin, &pair_id, &mut rng) {
            Ok(p) => return Ok(p),
            Err(e @ (GenError::PairConstructionFailed(_) | GenError::GenerationExhausted { .. })) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt")).with_context(|| format!("{pair_id}: gave up after {PAIR_RETRIES} attempts"))
}

fn gen_scenarios(args: GenScenariosArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    let taus = dedup_taus(&args.taus, err)?;
    if taus.is_empty() && args.pairs > 0 {
        return usage("--taus must list at least one value");
    }
    let v_agent = parse_vec(&args.v_agent, "v-agent")?;
    let v_patient = parse_vec(&args.v_patient, "v-patient")?;
    if !(args.fps > 0.0 && args.fps.is_finite()) {
        return usage(format!("--fps must be positive, got {}", args.fps));
    }
    let pairs = (0..args.pairs as u64)
        .into_par_iter()
        .map(|i| {
            let kin = Kinematics { v_agent, v_patient, frame_rate: args.fps, tau_gt: taus[i as usize % taus.len()] };
            build_pair(&cfg, &kin, i)
        })
        .collect::<Result<Vec<_>>>()?;
    let scenarios: Vec<Scenario<f64>> = pairs.into_iter().flat_map(|(c, v)| [c, v]).collect();

    let dir = &args.out.out;
    fs::create_dir_all(dir)?;
    if !scenarios.is_empty() {
        fs::create_dir_all(dir.join("masks"))?;
        fs::create_dir_all(dir.join("frames"))?;
    }
    scenarios.par_iter().try_for_each(|s| -> Result<()> {
        let (a, p) = scenario_masks(s)?;
        a.save(&dir.join("masks").join(format!("{}_agent.png", s.id)))?;
        p.save(&dir.join("masks").join(format!("{}_patient.png", s.id)))?;
        render_frame(s, &cfg).save(dir.join("frames").join(format!("{}.png", s.id)))?;
        Ok(())
    })?;
    save_video_meta(&dir.join(META_FILE), &meta_from_scenarios(&scenarios))?;
    let manifest = ScenarioManifest { seed: cfg.seed, config: cfg, taus, scenarios };
    manifest.save(&dir.join(SCENARIOS_FILE))?;
    writeln!(out, "wrote {} scenarios to {}", manifest.scenarios.len(), dir.join(SCENARIOS_FILE).display())?;
    Ok(())
}

fn gen_humans(args: GenHumansArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = SyntheticHumanConfig {
        participants: args.participants,
        bias_concave_s: args.bias_concave,
        bias_convex_s: args.bias_convex,
        sigma_s: args.sigma,
        seed: args.seed,
    };
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    let meta = load_video_meta(&args.meta).with_context(|| format!("reading {}", args.meta.display()))?;
    let rows = synthesize_humans(&cfg, &meta)?;
    let dir = &args.out.out;
    fs::create_dir_all(dir)?;
    write_human_csv(&dir.join(HUMANS_FILE), &provenance("gen-humans", Some(cfg.seed), &cfg)?, &rows)?;
    writeln!(out, "wrote {} responses to {}", rows.len(), dir.join(HUMANS_FILE).display())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct MaskSource {
    kind: &'static str,
    dir: Option<PathBuf>,
}

fn mask_source(args: &MaskSourceArgs) -> MaskSource {
    match (&args.masks_dir, &args.pmap_dir) {
        (Some(d), _) => MaskSource { kind: "masks", dir: Some(d.clone()) },
        (None, Some(d)) => MaskSource { kind: "pmap", dir: Some(d.clone()) },
        _ => MaskSource { kind: "exact", dir: None },
    }
}

fn load_object_masks(s: &Scenario<f64>, source: &MaskSource) -> Result<(BinaryMask, BinaryMask)> {
    let dir = source.dir.as_deref().unwrap_or(Path::new("."));
    match source.kind {
        "masks" => {
            let load = |role: &str| {
                let p = dir.join(format!("{}_{role}.png", s.id));
                BinaryMask::load(&p).with_context(|| format!("reading {}", p.display()))
            };
            Ok((load("agent")?, load("patient")?))
        }
        "pmap" => {
            let path = ["pmap", "npy"]
                .iter()
                .map(|ext| dir.join(format!("{}.{ext}", s.id)))
                .find(|p| p.exists())
                .with_context(|| format!("no {}.pmap or {}.npy in {}", s.id, s.id, dir.display()))?;
            let map = ProbabilityMap::<f64>::load(&path).with_context(|| format!("reading {}", path.display()))?;
            let (a, b) = two_largest(&mask_from_probability(&map))?;
            Ok(assign_objects(s, a, b))
        }
        _ => Ok(scenario_masks(s)?),
    }
}

/// Loads every scenario's masks in parallel, logging failures in manifest order.
fn load_all_masks(
    scenarios: &[Scenario<f64>],
    source: &MaskSource,
    pool: &rayon::ThreadPool,
    err: &mut dyn Write,
) -> Result<Vec<Option<(BinaryMask, BinaryMask)>>> {
    let loaded: Vec<Result<(BinaryMask, BinaryMask)>> =
        pool.install(|| scenarios.par_iter().map(|s| load_object_masks(s, source)).collect());
    let mut masks = Vec::with_capacity(loaded.len());
    for (s, m) in scenarios.iter().zip(loaded) {
        match m {
            Ok(m) => masks.push(Some(m)),
            Err(e) => {
                writeln!(err, "warning: {}: {e:#}; scenario excluded", s.id)?;
                masks.push(None);
            }
        }
    }
    Ok(masks)
}

fn check_horizon(h: f64) -> Result<()> {
    if h >= 0.0 && h.is_finite() {
        Ok(())
    } else {
        usage(format!("--horizon must be a non-negative number of seconds, got {h}"))
    }
}

#[derive(Serialize)]
struct RunTtcConfig<'a> {
    scenarios: &'a Path,
    mask_source: &'a MaskSource,
    coarsen: String,
    horizon_s: f64,
    generator: &'a GeneratorConfig,
}

fn run_ttc(args: RunTtcArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let op = parse_op(&args.coarsen)?;
    check_horizon(args.horizon)?;
    let manifest =
        ScenarioManifest::load(&args.scenarios).with_context(|| format!("reading {}", args.scenarios.display()))?;
    let source = mask_source(&args.source);
    let pool = pool(args.jobs)?;
    let masks = load_all_masks(&manifest.scenarios, &source, &pool, err)?;
    let results: Vec<Result<TtcResult<f64>>> = pool.install(|| {
        manifest
            .scenarios
            .par_iter()
            .zip(&masks)
            .map(|(s, m)| {
                let Some((a, p)) = m else { return Ok(TtcResult::missed()) };
                let (a, p) = coarsen_pair((a, p), &op)?;
                match scenario_ttc(s, (&a, &p), args.horizon) {
                    Ok(r) => Ok(r),
                    Err(TtcError::NoCollisionWithinHorizon(_)) => Ok(TtcResult::missed()),
                    Err(e) => Err(e.into()),
                }
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    for (s, r) in manifest.scenarios.iter().zip(results) {
        let r = r.unwrap_or_else(|e| {
            let _ = writeln!(err, "warning: {}: {e:#}", s.id);
            TtcResult::missed()
        });
        records.push(TtcRecord::new(s, &r));
    }
    let dir = &args.out.out;
    fs::create_dir_all(dir)?;
    let config = RunTtcConfig {
        scenarios: &args.scenarios,
        mask_source: &source,
        coarsen: op.to_string(),
        horizon_s: args.horizon,
        generator: &manifest.config,
    };
    write_ttc_csv(&dir.join(TTC_FILE), &provenance("run-ttc", Some(manifest.seed), &config)?, &records)?;
    let collided = records.iter().filter(|r| r.collided).count();
    writeln!(out, "wrote {} rows ({collided} collided) to {}", records.len(), dir.join(TTC_FILE).display())?;
    Ok(())
}

/// Seed recorded in a CSV's leading `# seed=` comment, if any.
fn recorded_seed(path: &Path) -> Option<u64> {
    let f = fs::File::open(path).ok()?;
    BufReader::new(f)
        .lines()
        .map_while(|l| l.ok())
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("seed=")?.parse().ok())
}

#[derive(Serialize)]
struct CompareConfig<'a> {
    ttc: &'a Path,
    humans: &'a Path,
    meta: &'a Path,
}

fn compare(args: CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let records = read_ttc_csv(&args.ttc).with_context(|| format!("reading {}", args.ttc.display()))?;
    let meta = load_video_meta(&args.meta).with_context(|| format!("reading {}", args.meta.display()))?;
    let human: HumanResponseTable<f64> =
        load_human_csv(&args.humans, meta.clone()).with_context(|| format!("reading {}", args.humans.display()))?;
    if human.dropped_rows > 0 {
        writeln!(err, "warning: dropped {} human rows without a positive response", human.dropped_rows)?;
    }
    let shared: BTreeSet<&str> =
        records.iter().map(|r| r.scenario_id.as_str()).filter(|id| meta.contains_key(*id)).collect();
    if shared.is_empty() {
        bail!("model and human files share no video ids");
    }
    let model_meta: VideoMetaMap = records
        .iter()
        .filter(|r| shared.contains(r.scenario_id.as_str()))
        .map(|r| {
            let m = &meta[&r.scenario_id];
            let vm = VideoMeta { tau_gt_s: r.tau_gt_s, condition: r.condition, pair_id: r.pair_id.clone(), ..m.clone() };
            (r.scenario_id.clone(), vm)
        })
        .collect();
    let model_means = records
        .iter()
        .filter(|r| shared.contains(r.scenario_id.as_str()))
        .filter_map(|r| r.ttc_model_s.map(|t| (r.scenario_id.clone(), t)))
        .collect();
    let model = condition_average(&model_means, &model_meta)?;
    let human_rows = human.rows.into_iter().filter(|r| shared.contains(r.video_id.as_str())).collect();
    let human_meta = meta.into_iter().filter(|(k, _)| shared.contains(k.as_str())).collect();
    let human = HumanResponseTable::new(human_rows, human_meta)?;
    let report = compare_tables(&model, &human_condition_table(&human)?)?;
    for tau in &report.unmatched_taus {
        writeln!(err, "warning: tau {} lacks a model or human effect; excluded", tau.0)?;
    }

    let dir = &args.out.out;
    fs::create_dir_all(dir)?;
    let seed = recorded_seed(&args.ttc);
    let config = CompareConfig { ttc: &args.ttc, humans: &args.humans, meta: &args.meta };
    let comments = provenance("compare", seed, &config)?;
    ttc_body::csvio::write_csv(&dir.join(REPORT_CSV), &comments, &ttc_body::alignment::aggregate::REPORT_CSV_HEADER, &report.rows())?;
    let json = serde_json::json!({
        "command": "compare",
        "seed": seed,
        "config": config,
        "report": report.to_json(),
    });
    fs::write(dir.join(REPORT_JSON), serde_json::to_string_pretty(&json)?)?;
    writeln!(out, "mean_error_s={} taus={}", report.mean_error_s, report.per_tau.len())?;
    Ok(())
}

fn sweep_ops(args: &SweepArgs) -> Result<Vec<CoarseningOp>> {
    let ops = if let Some(kind) = &args.kind {
        args.strengths.iter().map(|s| parse_op(&format!("{kind}:{s}"))).collect::<Result<Vec<_>>>()?
    } else if !args.ops.is_empty() {
        args.ops.iter().map(|s| parse_op(s)).collect::<Result<Vec<_>>>()?
    } else {
        (0..=8).map(|i| CoarseningOp::closing(2.0 * i as f64)).collect()
    };
    if ops.windows(2).any(|w| w[0].strength > w[1].strength) {
        return usage("sweep operators must be listed in increasing strength");
    }
    Ok(ops)
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    scenarios: &'a Path,
    humans: &'a Path,
    meta: Option<&'a Path>,
    ops: Vec<String>,
    mask_source: &'a MaskSource,
    horizon_s: f64,
    margin_s: f64,
    generator: &'a GeneratorConfig,
}

fn sweep(args: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let ops = sweep_ops(&args)?;
    check_horizon(args.horizon)?;
    if !(args.margin >= 0.0) {
        return usage(format!("--margin must be non-negative, got {}", args.margin));
    }
    let manifest =
        ScenarioManifest::load(&args.scenarios).with_context(|| format!("reading {}", args.scenarios.display()))?;
    let meta = match &args.meta {
        Some(p) => load_video_meta(p).with_context(|| format!("reading {}", p.display()))?,
        None => meta_from_scenarios(&manifest.scenarios),
    };
    let human: HumanResponseTable<f64> =
        load_human_csv(&args.humans, meta).with_context(|| format!("reading {}", args.humans.display()))?;
    let source = mask_source(&args.source);
    let pool = pool(args.jobs)?;
    let masks = load_all_masks(&manifest.scenarios, &source, &pool, err)?;
    let result = pool
        .install(|| run_sweep_with_masks(&manifest.scenarios, &masks, &human, &ops, args.horizon, args.margin))?;

    let dir = &args.out.out;
    fs::create_dir_all(dir)?;
    let config = SweepConfig {
        scenarios: &args.scenarios,
        humans: &args.humans,
        meta: args.meta.as_deref(),
        ops: ops.iter().map(|o| o.to_string()).collect(),
        mask_source: &source,
        horizon_s: args.horizon,
        margin_s: args.margin,
        generator: &manifest.config,
    };
    write_sweep_csv(&dir.join(SWEEP_FILE), &provenance("sweep", Some(manifest.seed), &config)?, &result)?;
    writeln!(out, "u_shaped={} argmin={}", result.is_u_shaped, result.argmin_value())?;
    Ok(())
}
