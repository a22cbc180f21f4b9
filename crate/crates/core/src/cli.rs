//! Command-line front end. A run is fully described by a [`RunConfig`]; it can
//! come from `--config <file>`, from a subcommand, or both. Precedence:
//! command-line flags, then `LORENTZ_LAB_*` environment variables, then the
//! config file, then built-in defaults. A subcommand given on the command line
//! replaces the command of the config file.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::audit::{necessity_witness, ratio_audit, Claim, Direction, TripleSpec, WitnessFamily, VERSION};
use crate::error::{Error, Result};
use crate::exponents::{parse_rational, ExtendedExponent, ParamTuple};
use crate::grid::{annulus_geometry, default_annulus_function, dilate_pow2, function_bank, read_binary, read_csv, write_binary, BankSpec, SampledFunction};
use crate::littlewood_paley::BandDecomposition;
use crate::predicates::{self, write_scan_csv, ScanSpec};
use crate::selftest::{self, Frozen, FIXTURE_SEED};
use crate::spaces::{default_family, evaluate_space, Scale, SpaceSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "lorentz-lab", version, about = "Lorentz-scale function space norms, condition catalog and audits")]
pub struct Cli {
    /// JSON run configuration
    #[arg(long, env = "LORENTZ_LAB_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "LORENTZ_LAB_SEED", global = true)]
    pub seed: Option<u64>,
    /// Size of the worker pool
    #[arg(long, env = "LORENTZ_LAB_WORKERS", global = true)]
    pub workers: Option<usize>,
    /// Directory for artifacts; stdout when absent
    #[arg(long, env = "LORENTZ_LAB_OUT", global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, env = "LORENTZ_LAB_FORMAT", global = true)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Where the input function comes from: a file, a bank member, or the
/// single-annulus function (the default).
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FunctionSource {
    /// Sampled function file (.csv, otherwise the binary container)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Bank family to draw from
    #[arg(long)]
    pub bank: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Dimension of the bank grid
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Dyadic dilation f(2^k x) applied after loading
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub dilate: i32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SpaceArgs {
    /// F, B, H, W or L
    #[arg(long, default_value = "F")]
    pub scale: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub s: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "2")]
    pub q: String,
    #[arg(long, default_value = "inf")]
    pub r: String,
    #[arg(long)]
    pub homogeneous: bool,
}

impl Default for SpaceArgs {
    fn default() -> Self {
        Self { scale: "F".into(), s: "0".into(), p: "2".into(), q: "2".into(), r: "inf".into(), homogeneous: false }
    }
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum PredicateAction {
    /// Evaluate one theorem, or the whole catalog, on a tuple
    Evaluate {
        /// Tuple as inline JSON or a path to a JSON file
        #[arg(long)]
        tuple: String,
        #[arg(long)]
        theorem: Option<String>,
    },
    /// Seeded consistency scan over a rational tuple grid
    Scan {
        #[arg(long, default_value_t = 10_000)]
        tuples: usize,
        #[arg(long, default_value_t = 1)]
        dim: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    DilationUp,
    DilationDown,
    Modulation,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate a space norm of an input function
    Norm {
        #[command(flatten)]
        #[serde(default)]
        input: FunctionSource,
        #[command(flatten)]
        #[serde(default)]
        space: SpaceArgs,
    },
    /// Write the Littlewood-Paley bands of an input function
    Decompose {
        #[command(flatten)]
        #[serde(default)]
        input: FunctionSource,
        #[arg(long)]
        #[serde(default)]
        homogeneous: bool,
    },
    /// Query the interpolation and embedding catalog
    Predicates {
        #[command(subcommand)]
        #[serde(flatten)]
        action: PredicateAction,
    },
    /// Interpolation ratio audit over a function bank
    Audit {
        /// TripleSpec as inline JSON or a path to a JSON file
        #[arg(long)]
        triple: String,
        #[arg(long, default_value = "random-bandlimited")]
        #[serde(default = "default_bank")]
        bank: String,
        #[arg(long, default_value_t = 50)]
        #[serde(default = "default_count")]
        count: usize,
        #[arg(long, default_value_t = 1)]
        #[serde(default = "default_dim")]
        dim: usize,
        /// Catalog statement the audit is meant to support
        #[arg(long, requires = "tuple")]
        #[serde(default)]
        claim: Option<String>,
        /// Parameter tuple of the claim
        #[arg(long)]
        #[serde(default)]
        tuple: Option<String>,
    },
    /// Necessity witness along a dilation or modulation family
    Witness {
        #[arg(long)]
        tuple: String,
        #[arg(long, default_value = "B")]
        scale: String,
        #[arg(long)]
        #[serde(default)]
        homogeneous: bool,
        #[arg(long, value_enum, default_value = "dilation-up")]
        family: WitnessKind,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Run even if the tuple satisfies the condition the family targets
        #[arg(long)]
        #[serde(default)]
        force: bool,
    },
    /// Run the acceptance criteria
    Selftest {
        /// Criterion numbers to run; all when empty
        #[arg(long, value_delimiter = ',')]
        #[serde(default)]
        only: Vec<u8>,
        /// Recompute the frozen thresholds and write them to this file
        #[arg(long)]
        #[serde(default)]
        freeze: Option<PathBuf>,
    },
}

fn default_bank() -> String {
    "random-bandlimited".into()
}

fn default_count() -> usize {
    50
}

fn default_dim() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_seed() -> u64 {
    FIXTURE_SEED
}

#[derive(Debug, Default, Deserialize)]
struct PartialConfig {
    command: Option<Command>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl RunConfig {
    /// Merges the command line over an optional config file.
    pub fn resolve(cli: Cli) -> Result<Self> {
        let file: PartialConfig = match &cli.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => PartialConfig::default(),
        };
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| Error::Config("no command given on the command line or in the config".into()))?;
        Ok(RunConfig {
            command,
            seed: cli.seed.or(file.seed).unwrap_or(FIXTURE_SEED),
            workers: cli.workers.or(file.workers),
            out: cli.out.or(file.out),
            format: cli.format.or(file.format).unwrap_or_default(),
        })
    }

    fn artifact_name(&self) -> &'static str {
        match &self.command {
            Command::Norm { .. } => "norm",
            Command::Decompose { .. } => "decompose",
            Command::Predicates { action: PredicateAction::Evaluate { .. } } => "predicates",
            Command::Predicates { action: PredicateAction::Scan { .. } } => "scan",
            Command::Audit { .. } => "audit",
            Command::Witness { .. } => "witness",
            Command::Selftest { .. } => "selftest",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    failed: bool,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a T>,
}

/// Outcome of a command: the serializable result, whether its assertions
/// held, and a CSV rendering.
struct Outcome {
    json: serde_json::Value,
    passed: bool,
    csv: Vec<u8>,
    /// Lines for the terminal, independent of the artifact format.
    notes: Vec<String>,
}

fn parse_json_arg<T: for<'de> Deserialize<'de>>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { fs::read_to_string(arg)? };
    Ok(serde_json::from_str(&text)?)
}

fn parse_scale(s: &str) -> Result<Scale> {
    match s.to_ascii_uppercase().as_str() {
        "F" => Ok(Scale::F),
        "B" => Ok(Scale::B),
        "H" => Ok(Scale::H),
        "W" => Ok(Scale::W),
        "L" => Ok(Scale::L),
        _ => Err(Error::Parse { what: "scale", input: s.into() }),
    }
}

fn parse_space(a: &SpaceArgs) -> Result<SpaceSpec> {
    SpaceSpec::new(
        parse_scale(&a.scale)?,
        parse_rational(&a.s)?,
        a.p.parse::<ExtendedExponent>()?,
        a.q.parse::<ExtendedExponent>()?,
        a.r.parse::<ExtendedExponent>()?,
        a.homogeneous,
    )
}

fn load_function(src: &FunctionSource, seed: u64) -> Result<SampledFunction> {
    let f = if let Some(path) = &src.input {
        let file = fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "csv") {
            read_csv(file)?
        } else {
            read_binary(io::BufReader::new(file))?
        }
    } else if let Some(family) = &src.bank {
        let bank = function_bank(&BankSpec::new(family, src.index + 1, seed, src.dim))?;
        bank.members.into_iter().nth(src.index).expect("bank has index + 1 members")
    } else {
        default_annulus_function(annulus_geometry())
    };
    dilate_pow2(&f, src.dilate)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn run_command(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Norm { input, space } => {
            let f = load_function(input, cfg.seed)?;
            let spec = parse_space(space)?;
            let res = evaluate_space(&f, &spec)?;
            let csv = csv_bytes(
                &["space", "value", "family_id", "truncation_defect", "tail_defect", "mean_stripped", "degenerate"],
                vec![vec![
                    spec.to_string(),
                    format!("{:.17e}", res.value),
                    res.family_id.clone().unwrap_or_default(),
                    format!("{:e}", res.truncation_defect),
                    format!("{:e}", res.tail_defect),
                    res.mean_stripped.to_string(),
                    res.degenerate.to_string(),
                ]],
            )?;
            let json = serde_json::json!({ "space": spec, "geometry": f.geometry, "norm": res });
            Ok(Outcome { json, passed: true, csv, notes: vec![format!("{spec} = {:.12e}", res.value)] })
        }
        Command::Decompose { input, homogeneous } => {
            let f = load_function(input, cfg.seed)?;
            let fam = default_family(&f, *homogeneous)?;
            let dec = BandDecomposition::new(&f, &fam);
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for (j, band) in fam.bands().zip(&dec.bands) {
                if let Some(dir) = &cfg.out {
                    fs::create_dir_all(dir)?;
                    write_binary(band, io::BufWriter::new(fs::File::create(dir.join(format!("band_{j}.llsf")))?))?;
                }
                rows.push(vec![j.to_string(), format!("{:.17e}", band.l2_norm()), format!("{:.17e}", band.sup_norm())]);
                summary.push(serde_json::json!({ "j": j, "l2": band.l2_norm(), "sup": band.sup_norm() }));
            }
            let json = serde_json::json!({
                "geometry": f.geometry,
                "family_id": dec.family_id,
                "j_range": [dec.j_min, dec.j_max],
                "truncation_defect": dec.truncation_defect,
                "tail_defect": dec.tail_defect,
                "bands": summary,
            });
            let note = format!("{} bands of {} over j in [{}, {}]", dec.bands.len(), dec.family_id, dec.j_min, dec.j_max);
            Ok(Outcome { json, passed: true, csv: csv_bytes(&["j", "l2", "sup"], rows)?, notes: vec![note] })
        }
        Command::Predicates { action: PredicateAction::Evaluate { tuple, theorem } } => {
            let t: ParamTuple = parse_json_arg(tuple)?;
            let ids: Vec<String> = match theorem {
                Some(id) => vec![id.clone()],
                None => predicates::theorem_ids().iter().map(|s| s.to_string()).collect(),
            };
            let verdicts = ids.iter().map(|id| predicates::evaluate(id, &t)).collect::<Result<Vec<_>>>()?;
            let rows = verdicts
                .iter()
                .map(|v| {
                    vec![
                        v.theorem_id.clone(),
                        v.applicable.to_string(),
                        v.matched_clauses.join(" "),
                        v.sufficient.as_str().into(),
                        v.necessary_region_member.as_str().into(),
                        v.iff_holds.as_str().into(),
                    ]
                })
                .collect();
            let csv = csv_bytes(&["theorem", "applicable", "clauses", "sufficient", "necessary", "iff"], rows)?;
            let notes = verdicts
                .iter()
                .filter(|v| v.applicable)
                .map(|v| format!("{}: sufficient {} {:?}", v.theorem_id, v.sufficient.as_str(), v.matched_clauses))
                .collect();
            Ok(Outcome { json: serde_json::to_value(&verdicts)?, passed: true, csv, notes })
        }
        Command::Predicates { action: PredicateAction::Scan { tuples, dim } } => {
            let spec = ScanSpec { n: *dim, tuples: *tuples, seed: cfg.seed };
            let (report, rows) = predicates::scan(&spec);
            let mut csv = Vec::new();
            write_scan_csv(&rows, &mut csv)?;
            let note = format!("{} tuples, {} evaluations, {} inconsistencies", report.tuples, report.evaluations, report.inconsistencies.len());
            Ok(Outcome { passed: report.inconsistencies.is_empty(), json: serde_json::to_value(&report)?, csv, notes: vec![note] })
        }
        Command::Audit { triple, bank, count, dim, claim, tuple } => {
            let spec: TripleSpec = parse_json_arg(triple)?;
            let claim = match (claim, tuple) {
                (Some(id), Some(t)) => Some(Claim { theorem_id: id.clone(), tuple: parse_json_arg(t)? }),
                _ => None,
            };
            let bank = function_bank(&BankSpec::new(bank, *count, cfg.seed, *dim))?;
            let report = ratio_audit(&bank, &spec, claim.as_ref())?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            let evaluated = report.per_function.iter().all(|r| r.ratio.is_some());
            let passed = evaluated
                && report.sup_ratio.is_finite()
                && report.orbit_spread.is_none_or(|s| s <= selftest::ORBIT_SPREAD_LIMIT);
            let note = format!(
                "sup ratio {:.6e} over {} functions, orbit spread {:?}, status {:?}",
                report.sup_ratio,
                report.per_function.len(),
                report.orbit_spread,
                report.status
            );
            Ok(Outcome { json: serde_json::to_value(&report)?, passed, csv, notes: vec![note] })
        }
        Command::Witness { tuple, scale, homogeneous, family, steps, force } => {
            let t: ParamTuple = parse_json_arg(tuple)?;
            let fam = match family {
                WitnessKind::DilationUp => WitnessFamily::Dilation { direction: Direction::Up },
                WitnessKind::DilationDown => WitnessFamily::Dilation { direction: Direction::Down },
                WitnessKind::Modulation => WitnessFamily::Modulation,
            };
            let w = necessity_witness(&t, parse_scale(scale)?, *homogeneous, fam, *steps, *force)?;
            let mut csv = Vec::new();
            w.write_csv(&mut csv)?;
            let note = format!("fitted exponent {:.6} vs predicted {:.6}, residual {:.2e}", w.fitted_exponent, w.predicted_exponent, w.residual);
            Ok(Outcome { json: serde_json::to_value(&w)?, passed: w.passed, csv, notes: vec![note] })
        }
        Command::Selftest { only, freeze } => {
            if let Some(path) = freeze {
                let frozen = selftest::freeze()?;
                fs::write(path, serde_json::to_string_pretty(&frozen)? + "\n")?;
                let note = format!("froze thresholds into {}", path.display());
                return Ok(Outcome { json: serde_json::to_value(&frozen)?, passed: true, csv: Vec::new(), notes: vec![note] });
            }
            let frozen = Frozen::bundled()?;
            let numbers: Vec<u8> = if only.is_empty() { selftest::CRITERIA.iter().map(|c| c.0).collect() } else { only.clone() };
            let outcomes = numbers.iter().map(|k| selftest::run_criterion(*k, &frozen)).collect::<Result<Vec<_>>>()?;
            let rows = outcomes
                .iter()
                .map(|o| vec![o.number.to_string(), o.id.clone(), o.passed.to_string(), o.detail.clone()])
                .collect();
            let csv = csv_bytes(&["criterion", "id", "passed", "detail"], rows)?;
            let report = selftest::SelftestReport {
                version: VERSION.into(),
                all_passed: outcomes.iter().all(|o| o.passed),
                outcomes,
            };
            let notes = report.outcomes.iter().map(|o| o.line()).collect();
            Ok(Outcome { passed: report.all_passed, json: serde_json::to_value(&report)?, csv, notes })
        }
    }
}

fn write_artifacts(cfg: &RunConfig, outcome: Option<&Outcome>, error: Option<String>) -> Result<()> {
    let failed = error.is_some() || outcome.is_some_and(|o| !o.passed);
    let name = cfg.artifact_name();
    let with_result = cfg.format == Format::Json;
    let envelope = Envelope {
        failed,
        version: VERSION,
        config: cfg,
        error,
        result: outcome.filter(|_| with_result).map(|o| &o.json),
    };
    let json = serde_json::to_string_pretty(&envelope)? + "\n";
    match (&cfg.out, cfg.format) {
        (Some(dir), Format::Json) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{name}.json")), json)?;
        }
        (Some(dir), Format::Csv) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{name}.meta.json")), json)?;
            if let Some(o) = outcome {
                fs::write(dir.join(format!("{name}.csv")), &o.csv)?;
            }
        }
        (None, Format::Json) => io::stdout().write_all(json.as_bytes())?,
        (None, Format::Csv) => match outcome {
            Some(o) => io::stdout().write_all(&o.csv)?,
            None => io::stdout().write_all(json.as_bytes())?,
        },
    }
    Ok(())
}

/// Runs a resolved configuration, writes its artifacts and returns whether
/// every assertion of the run held.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    if let Some(k) = cfg.workers {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match run_command(cfg) {
        Ok(outcome) => {
            for line in &outcome.notes {
                eprintln!("{line}");
            }
            write_artifacts(cfg, Some(&outcome), None)?;
            Ok(outcome.passed)
        }
        Err(e) => {
            write_artifacts(cfg, None, Some(e.to_string()))?;
            Err(e)
        }
    }
}

/// Exit status 0 when all assertions pass, 1 when one fails, 2 on errors.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Writes a config document that reruns `cfg`.
pub fn write_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(cfg)? + "\n")?;
    Ok(())
}
