//! Command-line front end. Every command writes one table, as CSV or JSON.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 when a numerical
//! tolerance could not be met.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::coefficients::{
    Coefficient, CoefficientFile, CoefficientKind, Density, Example41Spec, Example42Spec,
};
use crate::error::{Error, Result};
use crate::experiments::{
    example41_norm_lower_bound, example41_table, example42_numerical_range, example42_rayleigh,
    example42_table,
};
use crate::flow::FlowMap;
use crate::kernel::{heat_kernel, kernel_mass, kernel_slice, kernel_slice_table, KernelQuery};
use crate::metric_volume::{distance, doubling_scan};
use crate::numerics::{LpExponent, TestFunction, Window};
use crate::operators::{
    apply_group, apply_semigroup_kernel, apply_semigroup_subordination, contraction_probe,
    estimate_extension_constants, group_norm, numerical_range_sample, quadratic_form, range_table,
};
use crate::report::{Cell, Table};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DEGDIFF_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "degdiff", version, about = "Degenerate diffusion experiments")]
pub struct Cli {
    /// Coefficient spec (JSON, schema 1).
    #[arg(long, global = true)]
    pub coef: Option<PathBuf>,
    /// Output file. Defaults to `$DEGDIFF_OUT_DIR/<command>.<format>`, or
    /// stdout when that variable is unset.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApplyOp {
    Group,
    Subordination,
    Kernel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// e^{tX}x.
    Flow {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Intrinsic distance d(x;y).
    Dist {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Heat kernel at one point, or a slice y ↦ K_t(x;y) over [lo, hi].
    Kernel {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = -5.0)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
        hi: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// ∫ρ(y)K_t(x;y)dy.
    Mass {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// T_t or S_t applied to a bump.
    Apply {
        #[arg(long, value_enum, default_value = "subordination")]
        op: ApplyOp,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        center: f64,
        #[arg(long, default_value_t = 1.0)]
        halfwidth: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -5.0)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 5.0)]
        hi: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Grid estimate of ‖T_t‖_{p→p}.
    Norm {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -10.0)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
        hi: f64,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Extension constants (C, ω) on nested windows.
    Constants {
        #[arg(long, allow_negative_numbers = true)]
        inner_lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        inner_hi: f64,
        #[arg(long, allow_negative_numbers = true)]
        outer_lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        outer_hi: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
        omegas: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// (φ, Hφ) for φ = e^{iλx}·bump.
    Form {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        center: f64,
        #[arg(long, default_value_t = 1.0)]
        halfwidth: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Numerical-range samples. With an example42 spec and `--n`, uses the
    /// ramp family; otherwise modulated bumps.
    Range {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,10,-10")]
        lambdas: Vec<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        center: f64,
        #[arg(long, default_value_t = 1.0)]
        halfwidth: f64,
    },
    /// Volume doubling ratios V(x;2r)/V(x;r).
    Doubling {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        centers: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
    },
    /// Norm lower bounds for the factorial plateaus.
    Ex41 {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Rayleigh quotients on the bump-train ramps.
    Ex42 {
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        n: Vec<usize>,
    },
    /// Contraction probe terms for φ_n = (aρ)^{-1/p} τ(d(0;x)²/n).
    Probe {
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
        n: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Flow { .. } => "flow",
            Command::Dist { .. } => "dist",
            Command::Kernel { .. } => "kernel",
            Command::Mass { .. } => "mass",
            Command::Apply { .. } => "apply",
            Command::Norm { .. } => "norm",
            Command::Constants { .. } => "constants",
            Command::Form { .. } => "form",
            Command::Range { .. } => "range",
            Command::Doubling { .. } => "doubling",
            Command::Ex41 { .. } => "ex41",
            Command::Ex42 { .. } => "ex42",
            Command::Probe { .. } => "probe",
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

fn load(path: &Option<PathBuf>) -> Result<Option<CoefficientFile>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", p.display())))?;
            CoefficientFile::parse(&text).map(Some)
        }
    }
}

fn require(file: &Option<CoefficientFile>) -> Result<(Coefficient, Density)> {
    file.as_ref()
        .ok_or_else(|| Error::ConfigInvalid("this command needs --coef".into()))?
        .build()
}

fn example42_spec(file: &Option<CoefficientFile>, n_needed: usize) -> Result<Example42Spec> {
    match file.as_ref().map(|f| &f.kind) {
        Some(CoefficientKind::Example42 { n_terms }) => Example42Spec::new(*n_terms),
        Some(_) => Err(Error::ConfigInvalid("this command needs an example42 spec".into())),
        None => Example42Spec::new(n_needed.max(1)),
    }
}

/// Executes the command and writes its table.
pub fn run(cli: &Cli) -> Result<()> {
    let file = load(&cli.coef)?;
    let table = execute(&cli.command, &file)?;
    let text = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table_to_json(&table),
    };
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let target = match &cli.out {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(|d| Path::new(&d).join(format!("{}.{ext}", cli.command.name()))),
    };
    match target {
        Some(p) => fs::write(&p, text)
            .map_err(|e| Error::ConfigInvalid(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::ConfigInvalid(format!("cannot write stdout: {e}"))),
    }
}

/// Array of row objects; numbers are rounded to the CSV's 15 significant
/// digits so both formats carry the same values.
pub fn table_to_json(table: &Table) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (h, c) in table.header.iter().zip(row) {
                let v = match c {
                    Cell::Num(x) if x.is_finite() => {
                        let rounded: f64 = format!("{x:.14e}").parse().expect("float");
                        Value::from(rounded)
                    }
                    Cell::Num(x) => Value::from(crate::report::fmt_f64(*x)),
                    Cell::Int(i) => Value::from(*i),
                    Cell::Text(s) => Value::from(s.clone()),
                };
                m.insert(h.clone(), v);
            }
            Value::Object(m)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("serializable");
    s.push('\n');
    s
}

fn execute(cmd: &Command, file: &Option<CoefficientFile>) -> Result<Table> {
    match cmd {
        Command::Flow { t, x } => {
            let (coef, _) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let mut tab = Table::new(&["t", "x", "flow"]);
            tab.push(vec![(*t).into(), (*x).into(), fm.flow(*t, *x)?.into()]);
            Ok(tab)
        }
        Command::Dist { x, y } => {
            let (coef, _) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let mut tab = Table::new(&["x", "y", "distance"]);
            tab.push(vec![(*x).into(), (*y).into(), distance(&fm, *x, *y)?.into()]);
            Ok(tab)
        }
        Command::Kernel { t, x, y, lo, hi, points } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            match y {
                Some(y) => {
                    let k = heat_kernel(&fm, &rho, KernelQuery::new(*t, *x, *y)?)?;
                    let mut tab = Table::new(&["t", "x", "y", "K"]);
                    tab.push(vec![(*t).into(), (*x).into(), (*y).into(), k.into()]);
                    Ok(tab)
                }
                None => {
                    let w = Window::new(*lo, *hi, *points)?;
                    Ok(kernel_slice_table(&kernel_slice(&fm, &rho, *t, *x, &w)?))
                }
            }
        }
        Command::Mass { t, x } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let mut tab = Table::new(&["t", "x", "mass"]);
            tab.push(vec![(*t).into(), (*x).into(), kernel_mass(&fm, &rho, *t, *x)?.into()]);
            Ok(tab)
        }
        Command::Apply { op, t, center, halfwidth, lo, hi, points } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let phi = TestFunction::bump(*center, *halfwidth, 1.0)?;
            let w = Window::new(*lo, *hi, *points)?;
            let out = match op {
                ApplyOp::Group => apply_group(&fm, *t, &phi, &w)?,
                ApplyOp::Subordination => apply_semigroup_subordination(&fm, *t, &phi, &w, 12.0)?,
                ApplyOp::Kernel => apply_semigroup_kernel(&fm, &rho, *t, &phi, &w)?,
            };
            let mut tab = Table::new(&["y", "value"]);
            for (y, v) in out.iter() {
                tab.push(vec![y.into(), v.into()]);
            }
            Ok(tab)
        }
        Command::Norm { t, p, lo, hi, points } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let w = Window::new(*lo, *hi, *points)?;
            let n = group_norm(&fm, &rho, *t, LpExponent::new(*p)?, &w)?;
            let mut tab = Table::new(&["t", "p", "norm", "argmax", "window_lo", "window_hi", "skipped"]);
            tab.push(vec![
                n.t.into(),
                n.p.into(),
                n.value.into(),
                n.argmax.into(),
                n.window.0.into(),
                n.window.1.into(),
                n.skipped.into(),
            ]);
            Ok(tab)
        }
        Command::Constants { inner_lo, inner_hi, outer_lo, outer_hi, omegas, samples } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let ext = estimate_extension_constants(
                &fm,
                &rho,
                (*inner_lo, *inner_hi),
                (*outer_lo, *outer_hi),
                omegas,
                *samples,
            )?;
            let verdict = serde_json::to_value(ext.verdict).expect("serializable");
            let verdict = verdict.as_str().unwrap_or_default().to_string();
            let mut tab = Table::new(&["omega", "c_inner", "c_outer", "chosen", "verdict"]);
            for (w, ci, co) in &ext.table {
                tab.push(vec![
                    (*w).into(),
                    (*ci).into(),
                    (*co).into(),
                    usize::from(*w == ext.omega).into(),
                    verdict.clone().into(),
                ]);
            }
            Ok(tab)
        }
        Command::Form { center, halfwidth, lambda } => {
            let (coef, rho) = require(file)?;
            let phi = TestFunction::bump(*center, *halfwidth, 1.0)?.modulated(*lambda);
            let f = quadratic_form(&coef, &rho, &phi)?;
            let mut tab = Table::new(&["re", "im", "norm_sq", "rayleigh_re", "rayleigh_im"]);
            tab.push(vec![
                f.value.re.into(),
                f.value.im.into(),
                f.norm_sq.into(),
                f.rayleigh.re.into(),
                f.rayleigh.im.into(),
            ]);
            Ok(tab)
        }
        Command::Range { n, lambdas, center, halfwidth } => {
            if let Some(n) = n {
                let spec = example42_spec(file, *n)?;
                let r = example42_numerical_range(&spec, *n, lambdas)?;
                let labels: Vec<String> = r.samples.iter().map(|s| s.label.clone()).collect();
                let values: Vec<_> = r.samples.iter().map(|s| s.value).collect();
                return Ok(range_table(&values, &labels));
            }
            let (coef, rho) = require(file)?;
            let base = TestFunction::bump(*center, *halfwidth, 1.0)?;
            let family: Vec<TestFunction> = lambdas.iter().map(|l| base.modulated(*l)).collect();
            let values = numerical_range_sample(&coef, &rho, &family)?;
            let labels: Vec<String> = lambdas.iter().map(|l| format!("lambda_{l}")).collect();
            Ok(range_table(&values, &labels))
        }
        Command::Doubling { centers, radii, c, omega } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let scan = doubling_scan(&fm, &rho, centers, radii, c.map(|c| (c, *omega)))?;
            Ok(scan.to_table())
        }
        Command::Ex41 { n, p, t } => {
            let spec = match file.as_ref().map(|f| &f.kind) {
                Some(CoefficientKind::Example41 { n_max }) => Example41Spec::new(*n_max)?,
                Some(_) => {
                    return Err(Error::ConfigInvalid("ex41 needs an example41 spec".into()))
                }
                None => Example41Spec::new(n.iter().max().map_or(2, |m| (m + 1).max(2)))?,
            };
            let p = LpExponent::new(*p)?;
            let rows = n
                .iter()
                .map(|&k| example41_norm_lower_bound(&spec, k, p, *t))
                .collect::<Result<Vec<_>>>()?;
            Ok(example41_table(&rows))
        }
        Command::Ex42 { n } => {
            let spec = example42_spec(file, n.iter().copied().max().unwrap_or(4))?;
            let rows = n
                .iter()
                .map(|&k| example42_rayleigh(&spec, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(example42_table(&rows))
        }
        Command::Probe { p, n } => {
            let (coef, rho) = require(file)?;
            let fm = FlowMap::new(&coef)?;
            let p = LpExponent::new(*p)?;
            let mut tab = Table::new(&[
                "n",
                "p",
                "left",
                "right",
                "tail_integral",
                "tail_bound",
                "dissipativity",
            ]);
            for &k in n {
                let r = contraction_probe(&fm, &rho, p, k)?;
                tab.push(vec![
                    r.n.into(),
                    r.p.into(),
                    r.left.into(),
                    r.right.into(),
                    r.tail_integral.into(),
                    r.tail_bound.into(),
                    r.dissipativity.into(),
                ]);
            }
            Ok(tab)
        }
    }
}
