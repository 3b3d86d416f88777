//! Batch runner behind the `cqt` binary: builds QBD blocks, runs cyclic
//! reduction and renders a tab-separated report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cqt_core::{
    jackson_blocks, parse_matrix, parse_params, preset_by_name, solve_g, solve_r, write_matrix, CqtError, CqtMatrix,
    LaurentSymbol, QuadraticSolveReport, PRESETS,
};
use nalgebra::DMatrix;
use thiserror::Error;

/// Largest accepted CR tolerance.
pub const MAX_TOL: f64 = 1e-2;

pub const REPORT_HEADER: &str = "case\tcpu_time\tres_inf\tres_cqt\tband\trows\tcolumns\trank";

/// The scalar equation `x^2 - 2.5 x + 1 = 0`, minimal root 0.5.
pub const SCALAR_PRESET: &str = "scalar";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: CqtError },

    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{case}: {source}")]
    Solve { case: String, source: CqtError },
}

impl CliError {
    /// 2 for bad input, 3 for a CR breakdown, 4 when CR runs out of steps.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::Read { .. } => 2,
            CliError::Solve { source, .. } => match source {
                CqtError::Breakdown { .. } => 3,
                CqtError::MaxIterations(_) => 4,
                _ => 1,
            },
            CliError::Write { .. } => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    /// A preset name, `scalar`, or `all` for every Jackson preset.
    Preset(String),
    Params(PathBuf),
    /// Matrix files for `A-1`, `A0`, `A1`.
    Blocks([PathBuf; 3]),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Input,
    pub tol: f64,
    pub max_iter: usize,
    /// Solve for `R` instead of `G`.
    pub right: bool,
    /// Directory receiving one serialized solution per case.
    pub emit: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: Input, tol: f64, max_iter: usize) -> Result<Self, CliError> {
        check_tol(tol).map_err(CliError::Usage)?;
        if max_iter == 0 {
            return Err(CliError::Usage("max-iter must be at least 1".into()));
        }
        Ok(Self {
            input,
            tol,
            max_iter,
            right: false,
            emit: None,
        })
    }
}

pub fn check_tol(tol: f64) -> Result<f64, String> {
    if tol > 0.0 && tol <= MAX_TOL {
        Ok(tol)
    } else {
        Err(format!("tolerance must lie in (0, {MAX_TOL:e}], got {tol}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub case: String,
    /// Wall-clock seconds of the solve alone.
    pub cpu_time: f64,
    pub res_inf: f64,
    pub res_cqt: f64,
    pub band: usize,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
}

impl ReportRow {
    fn new(case: &str, secs: f64, r: &QuadraticSolveReport) -> Self {
        Self {
            case: case.to_string(),
            cpu_time: secs,
            res_inf: r.residual_inf,
            res_cqt: r.residual_cqt,
            band: r.band,
            rows: r.corr_rows,
            columns: r.corr_cols,
            rank: r.corr_rank,
        }
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{:.4}\t{:.3e}\t{:.3e}\t{}\t{}\t{}\t{}",
            self.case, self.cpu_time, self.res_inf, self.res_cqt, self.band, self.rows, self.columns, self.rank
        )
    }
}

struct Case {
    name: String,
    blocks: [CqtMatrix; 3],
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn jackson_case(name: &str, params: &cqt_core::JacksonParams) -> Result<Case, CqtError> {
    let t = jackson_blocks(params)?;
    Ok(Case {
        name: name.to_string(),
        blocks: [t.am1, t.a0, t.a1],
    })
}

fn cases(input: &Input) -> Result<Vec<Case>, CliError> {
    let usage = |e: CqtError| CliError::Usage(e.to_string());
    match input {
        Input::Preset(name) if name == SCALAR_PRESET => {
            let c = |x: f64| CqtMatrix::toeplitz(LaurentSymbol::constant(x));
            Ok(vec![Case {
                name: name.clone(),
                blocks: [c(1.0), c(-2.5), c(1.0)],
            }])
        }
        Input::Preset(name) if name == "all" => PRESETS
            .iter()
            .map(|p| jackson_case(p.name, &p.params).map_err(usage))
            .collect(),
        Input::Preset(name) => {
            let p = preset_by_name(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            Ok(vec![jackson_case(p.name, &p.params).map_err(usage)?])
        }
        Input::Params(path) => {
            let wrap = |source| CliError::Input {
                path: path.clone(),
                source,
            };
            let params = parse_params(&read(path)?).map_err(wrap)?;
            let name = path.file_stem().map_or("params".into(), |s| s.to_string_lossy().into_owned());
            Ok(vec![jackson_case(&name, &params).map_err(wrap)?])
        }
        Input::Blocks(paths) => {
            let mut blocks = Vec::with_capacity(3);
            for path in paths {
                blocks.push(parse_matrix(&read(path)?).map_err(|source| CliError::Input {
                    path: path.clone(),
                    source,
                })?);
            }
            let name = paths[1].file_stem().map_or("blocks".into(), |s| s.to_string_lossy().into_owned());
            Ok(vec![Case {
                name,
                blocks: blocks.try_into().expect("three blocks"),
            }])
        }
    }
}

/// Solves every case in turn, streaming the header and one row per case to
/// `out`. Stops at the first failing case.
pub fn run_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<ReportRow>, CliError> {
    let cases = cases(&cfg.input)?;
    let sink = |source| CliError::Write {
        path: PathBuf::from("<report>"),
        source,
    };
    writeln!(out, "{REPORT_HEADER}").map_err(sink)?;
    let mut rows = Vec::with_capacity(cases.len());
    for case in &cases {
        let [am1, a0, a1] = &case.blocks;
        let start = Instant::now();
        let solved = if cfg.right {
            solve_r(am1, a0, a1, cfg.tol, cfg.max_iter)
        } else {
            solve_g(am1, a0, a1, cfg.tol, cfg.max_iter)
        };
        let secs = start.elapsed().as_secs_f64();
        let report = solved.map_err(|source| CliError::Solve {
            case: case.name.clone(),
            source,
        })?;
        let row = ReportRow::new(&case.name, secs, &report);
        writeln!(out, "{}", row.to_tsv()).map_err(sink)?;
        if let Some(dir) = &cfg.emit {
            let path = dir.join(format!("{}-{}.txt", case.name, if cfg.right { "R" } else { "G" }));
            fs::write(&path, write_matrix(&report.solution)).map_err(|source| CliError::Write { path, source })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Largest absolute deviation of each operation's leading section from the
/// dense computation; `inv` is `Err` when `A` is not invertible.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub add: f64,
    pub mul: f64,
    pub inv: Result<f64, CqtError>,
}

impl VerifyReport {
    pub fn max_deviation(&self) -> f64 {
        let inv = self.inv.as_ref().copied().unwrap_or(0.0);
        self.add.max(self.mul).max(inv)
    }

    pub fn to_tsv(&self) -> String {
        let inv = match &self.inv {
            Ok(d) => format!("{d:.3e}"),
            Err(e) => format!("skipped ({e})"),
        };
        format!(
            "op\tmax_abs_dev\nadd\t{:.3e}\nmul\t{:.3e}\ninv\t{inv}\nmax\t{:.3e}\n",
            self.add,
            self.mul,
            self.max_deviation()
        )
    }
}

/// Columns of `A` that meet its leading `n` rows.
fn reach(a: &CqtMatrix, n: usize) -> usize {
    (n + a.symbol().n_plus()).max(a.correction().cols())
}

pub fn verify_pair(a: &CqtMatrix, b: &CqtMatrix, n: usize) -> VerifyReport {
    let add = ((a + b).finite_section(n) - (a.finite_section(n) + b.finite_section(n))).amax();
    let m = reach(a, n);
    let mul = ((a * b).finite_section(n) - a.block(n, m) * b.block(m, n)).amax();
    let inv = a.inv().map(|ai| {
        (a.block(n, m) * ai.block(m, n) - DMatrix::identity(n, n)).amax()
    });
    VerifyReport { add, mul, inv }
}

pub fn run_verify(a_path: &Path, b_path: &Path, n: usize, out: &mut dyn Write) -> Result<VerifyReport, CliError> {
    if n == 0 {
        return Err(CliError::Usage("section size must be at least 1".into()));
    }
    let load = |path: &Path| -> Result<CqtMatrix, CliError> {
        parse_matrix(&read(path)?).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })
    };
    let (a, b) = (load(a_path)?, load(b_path)?);
    let report = verify_pair(&a, &b, n);
    write!(out, "{}", report.to_tsv()).map_err(|source| CliError::Write {
        path: PathBuf::from("<report>"),
        source,
    })?;
    Ok(report)
}

/// One `name<TAB>lambda1 ... q` line per preset.
pub fn presets_table() -> String {
    let mut s = String::from("name\tlambda1\tlambda2\tmu1\tmu2\tp\tq\n");
    for p in &PRESETS {
        let v = &p.params;
        s += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            p.name, v.lambda1, v.lambda2, v.mu1, v.mu2, v.p, v.q
        );
    }
    s
}
