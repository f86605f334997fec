//! Command-line experiment runner: figure data files, table verification,
//! and certification trials. Deterministic under fixed seed and config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::certifier::{run_certification, CertifierConfig, Decision, EncodingPolicy};
use crate::families::{supply_ensemble, FamilyKind, FamilyParams};
use crate::game::{closed_form_win, exact_table, exact_win_probability, GameStrategy};
use crate::oracle::{classical_max_win, dual_path_max_deviation, verify_appendix_tables, Source};
use crate::qpq::{alice_success_same_subspace, born_success_general, section2_conditional_table};
use crate::quantum::StateEnsemble;
use crate::{Error, Result, TOL};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_ABORT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "qpq-dimtest", version, about = "Qubit-qutrit game and certification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Key-guess success probabilities over a theta grid.
    Figure1(GridArgs),
    /// Game winning probabilities for the three supply families.
    Figure2(GridArgs),
    /// Check every printed table and formula against the projector oracle.
    Verify(VerifyArgs),
    /// Run one certification and emit the verdict as JSON.
    Certify(CertifyArgs),
}

#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// Flat key=value config file; flags override file entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub theta_start: Option<f64>,
    #[arg(long)]
    pub theta_end: Option<f64>,
    #[arg(long)]
    pub theta_step: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Test hook: inject a fake table defect to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_defect: bool,
}

#[derive(Args, Debug, Default)]
pub struct CertifyArgs {
    /// Flat key=value config file; flags override file entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Supply family: same-subspace, diff-subspace, or product.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threshold slack; defaults to 3 sqrt(p(1-p)/n).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// fixed-hminus, fixed-vminus, or random-switch.
    #[arg(long)]
    pub encoding_policy: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flat key=value file with # comments; keys may use - or _.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn config_get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| Error::Config(format!("bad value for {key}: {e}"))),
    }
}

struct Grid {
    thetas: Vec<f64>,
    start: f64,
    step: f64,
}

fn resolve_grid(args: &GridArgs) -> Result<Grid> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let start = args
        .theta_start
        .or(config_get(&file, "theta_start")?)
        .unwrap_or(0.0);
    let end = args
        .theta_end
        .or(config_get(&file, "theta_end")?)
        .unwrap_or(std::f64::consts::FRAC_PI_2);
    let step = args
        .theta_step
        .or(config_get(&file, "theta_step")?)
        .unwrap_or(std::f64::consts::PI / 200.0);
    if !(step > 0.0) {
        return Err(Error::Config(format!("theta step must be positive, got {step}")));
    }
    if end < start {
        return Err(Error::Config("theta end precedes start".into()));
    }
    let mut thetas = Vec::new();
    let mut k = 0u64;
    loop {
        let t = start + k as f64 * step;
        if t > end + step * 1e-9 {
            break;
        }
        thetas.push(t.min(end));
        k += 1;
    }
    Ok(Grid { thetas, start, step })
}

fn resolve_format(args: &GridArgs) -> Result<String> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let fmt = args
        .format
        .clone()
        .or(config_get(&file, "format")?)
        .unwrap_or_else(|| "csv".to_string());
    match fmt.as_str() {
        "csv" | "json" => Ok(fmt),
        other => Err(Error::Config(format!("unknown format '{other}'"))),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn render_rows(
    format: &str,
    schema: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> String {
    let mut s = String::new();
    match format {
        "csv" => {
            let _ = writeln!(s, "# schema={schema} schema_version=1");
            let _ = writeln!(s, "{}", columns.join(","));
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
        }
        _ => {
            for row in rows {
                let mut obj = serde_json::Map::new();
                obj.insert("schema_version".into(), json!(1));
                obj.insert("schema".into(), json!(schema));
                for (c, v) in columns.iter().zip(row) {
                    obj.insert((*c).into(), json!(v));
                }
                let _ = writeln!(s, "{}", serde_json::Value::Object(obj));
            }
        }
    }
    s
}

/// Exact Born-rule value of the honest-case key-guess probability, summed
/// from the conditional table rather than the closed form.
fn qubit_qubit_born(theta: f64) -> Result<f64> {
    let table = section2_conditional_table(theta, 0)?;
    // conclusive wrong-basis rows (phi0', phi0'' against B=1; phi1', phi1''
    // against B=0), each basis chosen with probability 1/2
    Ok(0.5 * (table[1][1] + table[2][1] + table[4][0] + table[5][0]))
}

pub fn cmd_figure1(args: &GridArgs) -> Result<u8> {
    let grid = resolve_grid(args)?;
    let format = resolve_format(args)?;
    let columns = [
        "theta",
        "p_qubit_qubit",
        "p_qubit_qutrit",
        "p_qubit_qubit_born",
        "p_qubit_qutrit_born",
    ];
    let mut rows = Vec::with_capacity(grid.thetas.len());
    for &t in &grid.thetas {
        let printed_attack = 1.0 - t.sin().powi(4);
        let p = FamilyParams::general(t, 0.0, std::f64::consts::FRAC_PI_2, 0)?;
        rows.push(vec![
            t,
            alice_success_same_subspace(t),
            printed_attack,
            qubit_qubit_born(t)?,
            born_success_general(&p)?,
        ]);
    }
    let _ = (grid.start, grid.step);
    emit(&args.out, &render_rows(&format, "figure1", &columns, &rows))?;
    Ok(EXIT_OK)
}

pub fn cmd_figure2(args: &GridArgs) -> Result<u8> {
    let grid = resolve_grid(args)?;
    let format = resolve_format(args)?;
    let columns = [
        "theta",
        "wp_product",
        "wp_same",
        "wp_diff",
        "wp_product_exact",
        "wp_same_exact",
        "wp_diff_exact",
        "classical_bound",
    ];
    let strat = GameStrategy::standard(0);
    let exact = |kind: FamilyKind, t: f64| -> Result<f64> {
        let supply = supply_ensemble(kind, t, 0)?;
        Ok(exact_win_probability(&exact_table(&supply, &strat)?))
    };
    let mut rows = Vec::with_capacity(grid.thetas.len());
    for &t in &grid.thetas {
        rows.push(vec![
            t,
            closed_form_win(FamilyKind::ProductPair, t)?,
            closed_form_win(FamilyKind::SameSubspace, t)?,
            closed_form_win(FamilyKind::DiffSubspace, t)?,
            exact(FamilyKind::ProductPair, t)?,
            exact(FamilyKind::SameSubspace, t)?,
            exact(FamilyKind::DiffSubspace, t)?,
            0.75,
        ]);
    }
    emit(&args.out, &render_rows(&format, "figure2", &columns, &rows))?;
    Ok(EXIT_OK)
}

/// Flagged entries the report is expected to contain; anything beyond this
/// set is a verification failure.
fn documented(source: Source, location: &str) -> bool {
    matches!(
        (source, location),
        (Source::AppendixA, "(x,y,a,b)=(1,0,0,0)") | (Source::Section2Total, "Pr(A=B) final line")
    )
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let grid = resolve_grid(&args.grid)?;
    let format = resolve_format(&args.grid)?;
    let mut report = verify_appendix_tables(&grid.thetas)?;
    if args.inject_defect {
        report.entries.push(crate::oracle::Discrepancy {
            source: Source::AppendixB,
            location: "(test-hook)".into(),
            printed_value: 0.0,
            oracle_value: 1.0,
            at_theta: 0.0,
            max_abs_diff_over_grid: 1.0,
            note: "injected defect".into(),
        });
    }
    let dual_dev = dual_path_max_deviation(&grid.thetas)?;
    let classical = classical_max_win();

    let mut ok = dual_dev < TOL && (classical.max_win - 0.75).abs() < TOL;
    let mut undocumented = Vec::new();
    for e in &report.entries {
        if !documented(e.source, &e.location) {
            undocumented.push(format!("{:?} {}", e.source, e.location));
            ok = false;
        }
    }
    // the two documented defects must actually be found
    if !report.is_flagged(Source::AppendixA, "(x,y,a,b)=(1,0,0,0)")
        || !report.is_flagged(Source::Section2Total, "Pr(A=B) final line")
    {
        ok = false;
    }

    let content = if format == "json" {
        let mut v = serde_json::to_value(&report).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.insert("dual_path_max_deviation".into(), json!(dual_dev));
        obj.insert("undocumented_flags".into(), json!(undocumented));
        obj.insert("status".into(), json!(if ok { "pass" } else { "fail" }));
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        let mut s = report.to_text();
        let _ = writeln!(s, "dual-path max deviation: {dual_dev:.3e}");
        let _ = writeln!(
            s,
            "classical bound: {} over {} strategies",
            classical.max_win, classical.strategies_enumerated
        );
        for u in &undocumented {
            let _ = writeln!(s, "UNDOCUMENTED FLAG: {u}");
        }
        let _ = writeln!(s, "status: {}", if ok { "pass" } else { "fail" });
        s
    };
    emit(&args.grid.out, &content)?;
    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<u8> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let family: FamilyKind = args
        .family
        .clone()
        .or(config_get(&file, "family")?)
        .unwrap_or_else(|| "same-subspace".into())
        .parse()?;
    let policy: EncodingPolicy = args
        .encoding_policy
        .clone()
        .or(config_get(&file, "encoding_policy")?)
        .unwrap_or_else(|| "random-switch".into())
        .parse()?;
    let cfg = CertifierConfig {
        n: args.n.or(config_get(&file, "n")?).unwrap_or(443),
        theta: args
            .theta
            .or(config_get(&file, "theta")?)
            .unwrap_or(std::f64::consts::FRAC_PI_4),
        epsilon: args.epsilon.or(config_get(&file, "epsilon")?),
        seed: args.seed.or(config_get(&file, "seed")?).unwrap_or(1),
        encoding_policy: policy,
    };
    let supply: StateEnsemble = supply_ensemble(family, cfg.theta, 0)?;
    let verdict = run_certification(&cfg, &supply)?;
    let mut v = serde_json::to_value(&verdict).unwrap();
    v.as_object_mut()
        .unwrap()
        .insert("family".into(), json!(family.name()));
    let content = format!("{}\n", serde_json::to_string_pretty(&v).unwrap());
    emit(&args.out, &content)?;
    Ok(match verdict.decision {
        Decision::Proceed => EXIT_OK,
        Decision::Abort => EXIT_ABORT,
    })
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Figure1(a) => cmd_figure1(a),
        Command::Figure2(a) => cmd_figure2(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Certify(a) => cmd_certify(a),
    }
}
