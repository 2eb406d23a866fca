use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use entropy_wb::continuous::{
    default_resolutions, make_density_spec, min_coupling_series, joint_series, ConvergenceSeries, DensityFamily,
    JointDensity,
};
use entropy_wb::instances::random_pairs;
use entropy_wb::{
    cograduation_table, compare_greedy_oracle, contrograduation_table, enumerate_vertices, exact_partition_check,
    greedy_min_coupling, independence_table, oracle_min_entropy, partition_coupling,
    CouplingTable, MarginalDistribution, DEFAULT_TOL,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{emit, parse_marginal_file, table_to_csv};
use crate::report::{round12, to_json, TableReport};

/// Gaps above this count as a failure of greedy optimality.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Couple,
    Bounds,
    Compare,
    Partition,
    Converge,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Greedy,
    Independence,
    Cograduation,
    Contrograduation,
    Oracle,
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Joint,
    MinCoupling,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub marginal_x: Option<PathBuf>,
    pub marginal_y: Option<PathBuf>,
    pub method: Method,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub n_list: Option<Vec<usize>>,
    pub family: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            marginal_x: None,
            marginal_y: None,
            method: Method::Greedy,
            out: None,
            report: None,
            n_list: None,
            family: None,
            params: BTreeMap::new(),
            mode: Mode::MinCoupling,
            seed: None,
            tol: None,
        }
    }

    fn marginals(&self) -> CliResult<(MarginalDistribution, MarginalDistribution)> {
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        let need = |p: Option<PathBuf>, flag: &str| p.ok_or_else(|| CliError::Usage(format!("{flag} is required")));
        Ok((
            parse_marginal_file(&need(self.marginal_x.clone(), "--marginal-x")?, tol)?,
            parse_marginal_file(&need(self.marginal_y.clone(), "--marginal-y")?, tol)?,
        ))
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

/// Parses `2,4,8` or a doubling range `2..256`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if a == 0 || a > b {
            return Err(format!("empty range {s:?}"));
        }
        Ok(std::iter::successors(Some(a), |&n| n.checked_mul(2)).take_while(|&n| n <= b).collect())
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
            .collect()
    }
}

/// Runs one command; returns the process exit code (0, or 2 when a
/// greedy/oracle gap above [`GAP_TOL`] was found).
pub fn run_command(cfg: &RunConfig) -> CliResult<i32> {
    match cfg.command {
        Command::Couple => couple(cfg),
        Command::Bounds => bounds(cfg),
        Command::Compare => compare(cfg),
        Command::Partition => partition(cfg),
        Command::Converge => converge(cfg),
        Command::Oracle => oracle(cfg),
    }
}

fn write_table(cfg: &RunConfig, t: &CouplingTable, report: &impl Serialize) -> CliResult<()> {
    emit(cfg.out.as_deref(), &table_to_csv(t))?;
    if let Some(p) = cfg.report.as_deref() {
        emit(Some(p), &to_json(report)?)?;
    }
    Ok(())
}

fn build(method: Method, x: &MarginalDistribution, y: &MarginalDistribution) -> CliResult<(CouplingTable, Option<entropy_wb::GreedyTrace>)> {
    Ok(match method {
        Method::Greedy => {
            let (t, trace) = greedy_min_coupling(x, y);
            (t, Some(trace))
        }
        Method::Independence => (independence_table(x, y), None),
        Method::Cograduation => (cograduation_table(x, y), None),
        Method::Contrograduation => (contrograduation_table(x, y), None),
        Method::Oracle => (oracle_min_entropy(x, y)?.0, None),
        Method::Partition => {
            let w = exact_partition_check(x, y)
                .ok_or_else(|| CliError::Usage("no exact partition coupling exists for these marginals".into()))?;
            (partition_coupling(x, y, &w)?, None)
        }
    })
}

fn couple(cfg: &RunConfig) -> CliResult<i32> {
    let (x, y) = cfg.marginals()?;
    let (t, trace) = build(cfg.method, &x, &y)?;
    write_table(cfg, &t, &TableReport::new(&t, trace.as_ref()))?;
    Ok(0)
}

#[derive(Serialize)]
struct BoundsReport {
    h_x: f64,
    h_y: f64,
    /// `max(H(X), H(Y))`
    lower_bound: f64,
    /// `H(X) + H(Y)`
    upper_bound: f64,
    tables: Vec<TableReport>,
}

fn bounds(cfg: &RunConfig) -> CliResult<i32> {
    let (x, y) = cfg.marginals()?;
    let (hx, hy) = (x.entropy(), y.entropy());
    let tables = [independence_table(&x, &y), cograduation_table(&x, &y), contrograduation_table(&x, &y)];
    let mut csv = String::from("method,h_xy,mutual_information,lower_bound_slack,upper_bound_slack\n");
    let reports: Vec<TableReport> = tables.iter().map(|t| TableReport::new(t, None)).collect();
    for r in &reports {
        writeln!(csv, "{},{},{},{},{}", r.provenance, r.h_xy, r.mutual_information, r.lower_bound_slack, r.upper_bound_slack).unwrap();
    }
    emit(cfg.out.as_deref(), &csv)?;
    if let Some(p) = cfg.report.as_deref() {
        let report = BoundsReport {
            h_x: round12(hx),
            h_y: round12(hy),
            lower_bound: round12(hx.max(hy)),
            upper_bound: round12(hx + hy),
            tables: reports,
        };
        emit(Some(p), &to_json(&report)?)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct CompareReport {
    greedy_h: f64,
    oracle_h: f64,
    gap: f64,
    greedy_is_minimal: bool,
    greedy: TableReport,
    /// Minimizing table, row-major, when greedy is not minimal.
    certificate: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct SweepReport {
    seed: u64,
    instances: usize,
    max_rows: usize,
    max_cols: usize,
    gaps_above_tol: usize,
    max_gap: f64,
    min_gap: f64,
}

fn compare(cfg: &RunConfig) -> CliResult<i32> {
    if cfg.marginal_x.is_some() || cfg.marginal_y.is_some() {
        let (x, y) = cfg.marginals()?;
        let rec = compare_greedy_oracle(&x, &y)?;
        let (_, trace) = greedy_min_coupling(&x, &y);
        let report = CompareReport {
            greedy_h: round12(rec.greedy_h),
            oracle_h: round12(rec.oracle_h),
            gap: round12(rec.gap),
            greedy_is_minimal: rec.greedy_is_minimal(),
            greedy: TableReport::new(&rec.greedy, Some(&trace)),
            certificate: rec.certificate.as_ref().map(CouplingTable::to_nested),
        };
        // The table file holds the minimizer: the certificate when greedy loses.
        if let Some(p) = cfg.out.as_deref() {
            emit(Some(p), &table_to_csv(rec.certificate.as_ref().unwrap_or(&rec.greedy)))?;
        }
        emit(cfg.report.as_deref(), &to_json(&report)?)?;
        return Ok(if rec.gap > GAP_TOL { 2 } else { 0 });
    }
    let seed = cfg.seed.ok_or_else(|| CliError::Usage("compare needs --marginal-x/--marginal-y or --seed".into()))?;
    let count = cfg.param("count", 500.0) as usize;
    let max_rows = cfg.param("max_rows", 4.0) as usize;
    let max_cols = cfg.param("max_cols", 4.0) as usize;
    let pairs = random_pairs(&mut ChaCha8Rng::seed_from_u64(seed), count, max_rows, max_cols);
    let mut csv = String::from("instance,rows,cols,x,y,greedy_h,oracle_h,gap\n");
    let (mut above, mut max_gap, mut min_gap) = (0usize, f64::NEG_INFINITY, f64::INFINITY);
    for (i, (x, y)) in pairs.iter().enumerate() {
        let rec = compare_greedy_oracle(x, y)?;
        above += usize::from(rec.gap > GAP_TOL);
        max_gap = max_gap.max(rec.gap);
        min_gap = min_gap.min(rec.gap);
        let join = |p: &[f64]| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(
            csv,
            "{i},{},{},{},{},{},{},{}",
            x.len(),
            y.len(),
            join(x.probs()),
            join(y.probs()),
            round12(rec.greedy_h),
            round12(rec.oracle_h),
            round12(rec.gap)
        )
        .unwrap();
    }
    emit(cfg.out.as_deref(), &csv)?;
    let report = SweepReport {
        seed,
        instances: count,
        max_rows,
        max_cols,
        gaps_above_tol: above,
        max_gap: round12(max_gap),
        min_gap: round12(min_gap),
    };
    if let Some(p) = cfg.report.as_deref() {
        emit(Some(p), &to_json(&report)?)?;
    }
    Ok(if above > 0 { 2 } else { 0 })
}

#[derive(Serialize)]
struct PartitionReport {
    found: bool,
    /// True when the blocks partition the columns rather than the rows.
    transposed: bool,
    blocks: Vec<Vec<usize>>,
    targets: Vec<usize>,
    table: Option<TableReport>,
}

fn partition(cfg: &RunConfig) -> CliResult<i32> {
    let (x, y) = cfg.marginals()?;
    let report = match exact_partition_check(&x, &y) {
        Some(w) => {
            let t = partition_coupling(&x, &y, &w)?;
            emit(cfg.out.as_deref(), &table_to_csv(&t))?;
            PartitionReport {
                found: true,
                transposed: w.transposed,
                blocks: w.blocks.clone(),
                targets: w.targets.clone(),
                table: Some(TableReport::new(&t, None)),
            }
        }
        None => PartitionReport { found: false, transposed: false, blocks: vec![], targets: vec![], table: None },
    };
    match cfg.report.as_deref() {
        Some(p) => emit(Some(p), &to_json(&report)?)?,
        None if !report.found => print!("{}", to_json(&report)?),
        None => {}
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleReport {
    vertices: usize,
    #[serde(flatten)]
    table: TableReport,
}

fn oracle(cfg: &RunConfig) -> CliResult<i32> {
    let (x, y) = cfg.marginals()?;
    let count = enumerate_vertices(&x, &y)?.count();
    let (t, _) = oracle_min_entropy(&x, &y)?;
    write_table(cfg, &t, &OracleReport { vertices: count, table: TableReport::new(&t, None) })?;
    Ok(0)
}

fn density_family(cfg: &RunConfig) -> CliResult<(DensityFamily, f64)> {
    let name = cfg.family.as_deref().ok_or_else(|| CliError::Usage("--family is required".into()))?;
    let tol = cfg.tol.unwrap_or(1e-10);
    Ok(match name {
        "uniform" => (DensityFamily::Uniform { a: cfg.param("a", 0.0), b: cfg.param("b", 1.0) }, cfg.tol.unwrap_or(0.0)),
        "normal" => (DensityFamily::Normal { mean: cfg.param("mean", 0.0), sd: cfg.param("sd", 1.0) }, tol),
        "exponential" => (DensityFamily::Exponential { rate: cfg.param("rate", 1.0) }, tol),
        other => return Err(CliError::Usage(format!("unknown family {other:?} (uniform, normal, exponential)"))),
    })
}

#[derive(Serialize)]
struct SeriesReport {
    family: String,
    mode: &'static str,
    resolutions: Vec<usize>,
    last_value: f64,
    extrapolated_limit: f64,
    /// The same limit under the opposite sign of the `ln n` shift.
    last_plus_shift_value: f64,
    vertical_strings: Option<usize>,
    horizontal_strings: Option<usize>,
    bits: SeriesBits,
}

#[derive(Serialize)]
struct SeriesBits {
    last_value: f64,
    extrapolated_limit: f64,
}

fn series_csv(s: &ConvergenceSeries) -> String {
    let mut csv = String::from("n,raw,shifted,plus_shift,tail_error_bound\n");
    for k in 0..s.len() {
        writeln!(
            csv,
            "{},{},{},{},{}",
            s.resolutions[k],
            round12(s.raw_values[k]),
            round12(s.shifted_values[k]),
            round12(s.plus_shift_values[k]),
            round12(s.tail_error_bounds[k])
        )
        .unwrap();
    }
    csv
}

fn converge(cfg: &RunConfig) -> CliResult<i32> {
    let (family, window_tol) = density_family(cfg)?;
    let spec = make_density_spec(family, window_tol)?;
    let n_list = cfg.n_list.clone().unwrap_or_else(default_resolutions);
    let (series, strings) = match cfg.mode {
        Mode::Joint => (joint_series(&spec, &spec, &JointDensity::Product, &n_list)?, None),
        Mode::MinCoupling => {
            let r = min_coupling_series(&spec, &spec, &n_list)?;
            (r.series, Some(r.final_strings))
        }
    };
    emit(cfg.out.as_deref(), &series_csv(&series))?;
    if let Some(p) = cfg.report.as_deref() {
        let report = SeriesReport {
            family: cfg.family.clone().unwrap_or_default(),
            mode: series.mode.as_str(),
            resolutions: series.resolutions.clone(),
            last_value: round12(series.last_value),
            extrapolated_limit: round12(series.extrapolated_limit),
            last_plus_shift_value: round12(*series.plus_shift_values.last().expect("nonempty")),
            vertical_strings: strings.as_ref().map(|s| s.vertical.len()),
            horizontal_strings: strings.as_ref().map(|s| s.horizontal.len()),
            bits: SeriesBits {
                last_value: round12(entropy_wb::nats_to_bits(series.last_value)),
                extrapolated_limit: round12(entropy_wb::nats_to_bits(series.extrapolated_limit)),
            },
        };
        emit(Some(p), &to_json(&report)?)?;
    }
    Ok(0)
}
