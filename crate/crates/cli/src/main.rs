//! `bbr`: positivity radii, transformed lower bounds, multiplier tables and
//! the verification suite from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod table;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bbr_core::caratheodory::extremal_h;
use bbr_core::transform::{apply_phi, radius_closed_form, radius_numeric_adaptive};
use bbr_core::verify::{run_suite, summary_table, to_json_lines, sharpness_scan, Grid, Status, Summary, SuiteConfig};
use bbr_core::{ClassParams, TransformFamily, TransformSpec, TruncatedSeries};
use clap::{Parser, Subcommand};
use serde_json::value::RawValue;
use serde_json::Value;
use thiserror::Error;

use table::{format_number, json_object, Cell, Format, OutputFormat, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] bbr_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(name = "bbr", version, about = "Positivity radii and transform bounds for P_k(beta)")]
struct Cli {
    /// Output format. Tables default to CSV; `verify` writes JSON lines and
    /// `transform` writes a series JSON unless CSV is asked for.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
    /// Truncation order of the series used by identity checks.
    #[arg(long, global = true, env = "BBR_ORDER", default_value_t = bbr_core::series::DEFAULT_ORDER)]
    order: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radius r(k, beta) of the disk where every member of P_k(beta) has positive real part.
    Radius {
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Also bracket the radius of the extremal function by bisection.
        #[arg(long)]
        numeric_check: bool,
    },
    /// Lower bound for Re phi(h) over the class against its value at the extremal function.
    Bound {
        #[arg(long)]
        j: u8,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Radii as start:stop:step, inside [0, 0.95].
        #[arg(long, default_value = "0:0.9:0.1")]
        r_grid: String,
    },
    /// Coefficient multipliers c^j_{l,n} for l = 1..=max_l.
    Coeffs {
        #[arg(long)]
        j: u8,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10)]
        max_l: usize,
    },
    /// Run the verification suite. Exits 1 if any case fails.
    Verify {
        /// `default`, a JSON grid file, or inline axes such as `k=2,4;beta=0`.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        members: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Write the report here; the summary then goes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply phi^j_{sigma,n} to a series given as JSON ({"order", "coeffs_re", "coeffs_im", "tail_bound"}).
    Transform {
        #[arg(long)]
        j: u8,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long)]
        n: u32,
        /// Input file; standard input when omitted or `-`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn spec(j: u8, sigma: f64, n: u32) -> Result<TransformSpec, CliError> {
    Ok(TransformSpec::new(TransformFamily::try_from(j)?, sigma, n)?)
}

/// Parses `start:stop:step` into the radii `start, start + step, …` not exceeding `stop`.
fn parse_r_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(CliError::Usage(format!("r-grid must be start:stop:step, got {text:?}")));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad number {s:?} in r-grid")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if !(step > 0.0) || !(stop >= start) {
        return Err(CliError::Usage("r-grid needs step > 0 and stop >= start".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // Snap the last point onto `stop` so `0:0.95:0.05` ends at 0.95, not one ulp above.
    Ok((0..count)
        .map(|i| {
            let r = start + step * i as f64;
            if (r - stop).abs() <= 1e-9 * step { stop } else { r }
        })
        .collect())
}

fn load_grid(arg: &str) -> Result<Grid, CliError> {
    if arg == "default" {
        return Ok(Grid::default());
    }
    let path = PathBuf::from(arg);
    if path.is_file() {
        return Ok(Grid::from_json(&fs::read_to_string(path)?)?);
    }
    Ok(Grid::parse_inline(arg)?)
}

fn read_input(input: Option<PathBuf>) -> Result<String, CliError> {
    match input {
        Some(p) if p.as_os_str() != "-" => Ok(fs::read_to_string(p)?),
        _ => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn raw_number(x: f64, precision: usize) -> Result<Box<RawValue>, CliError> {
    if x.is_finite() {
        Ok(RawValue::from_string(format_number(x, precision))?)
    } else {
        Err(CliError::Parse(format!("cannot write non-finite coefficient {x}")))
    }
}

fn raw_array(xs: impl Iterator<Item = f64>, precision: usize) -> Result<Box<RawValue>, CliError> {
    let items: Vec<String> = xs
        .map(|x| raw_number(x, precision).map(|r| r.get().to_string()))
        .collect::<Result<_, _>>()?;
    Ok(RawValue::from_string(format!("[{}]", items.join(",")))?)
}

/// The series in the same JSON shape the transform command reads.
fn series_json(s: &TruncatedSeries, precision: usize) -> Result<String, CliError> {
    let tail = match s.tail_bound() {
        Some(b) => raw_number(b, precision)?,
        None => RawValue::from_string("null".into())?,
    };
    Ok(json_object(&[
        ("order".into(), RawValue::from_string(s.order().to_string())?),
        ("coeffs_re".into(), raw_array(s.coeffs().iter().map(|c| c.re), precision)?),
        ("coeffs_im".into(), raw_array(s.coeffs().iter().map(|c| c.im), precision)?),
        ("tail_bound".into(), tail),
    ]) + "\n")
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let requested = cli.format;
    let format = OutputFormat {
        kind: requested.unwrap_or(Format::Csv),
        precision: cli.precision as usize,
    };
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Radius { k, beta, numeric_check } => {
            let params = ClassParams::new(k, beta)?;
            let radius = radius_closed_form(&params);
            let mut headers = vec!["k", "beta", "radius"];
            let mut row: Vec<Cell> = vec![k.into(), beta.into(), radius.into()];
            if numeric_check {
                let report = radius_numeric_adaptive(|n| Ok(extremal_h(&params, n)), Some(&params), 1e-7)?;
                headers.extend(["lo", "hi", "discrepancy"]);
                row.extend([
                    report.lo.into(),
                    report.hi.into(),
                    report.discrepancy.unwrap_or(f64::NAN).into(),
                ]);
            }
            let mut table = Table::new(&headers);
            table.push(row);
            table.emit(&mut stdout, format)?;
        }
        Command::Bound {
            j,
            sigma,
            n,
            k,
            beta,
            r_grid,
        } => {
            let spec = spec(j, sigma, n)?;
            let params = ClassParams::new(k, beta)?;
            let rows = sharpness_scan(&params, &spec, &parse_r_grid(&r_grid)?)?;
            let mut table = Table::new(&["r", "bound", "value_at_h", "gap", "min_re", "inside"]);
            for row in rows {
                table.push(vec![
                    row.r.into(),
                    row.bound.into(),
                    row.value.into(),
                    row.gap.into(),
                    row.min_re.into(),
                    row.inside.into(),
                ]);
            }
            table.emit(&mut stdout, format)?;
        }
        Command::Coeffs { j, sigma, n, max_l } => {
            let spec = spec(j, sigma, n)?;
            if max_l == 0 {
                return Err(CliError::Usage("max-l must be at least 1".into()));
            }
            let mut table = Table::new(&["l", "multiplier"]);
            for l in 1..=max_l {
                table.push(vec![Cell::Int(l as i64), spec.coeff_multiplier(l).into()]);
            }
            table.emit(&mut stdout, format)?;
        }
        Command::Verify {
            grid,
            seed,
            members,
            samples,
            out,
        } => {
            let grid = load_grid(&grid)?;
            let config = SuiteConfig {
                seed,
                order: cli.order,
                members,
                samples,
            };
            let cases = run_suite(&grid, &config)?;
            let report = match requested.unwrap_or(Format::Json) {
                Format::Json => reformat_json_lines(&to_json_lines(&cases)?, format.precision)?,
                Format::Csv => report_csv(&cases, format.precision)?,
            };
            let summary = summary_table(&cases);
            match out {
                Some(path) => {
                    fs::write(path, report)?;
                    stdout.write_all(summary.as_bytes())?;
                }
                None => {
                    stdout.write_all(report.as_bytes())?;
                    eprint!("{summary}");
                }
            }
            stdout.flush()?;
            if Summary::of(&cases).fail > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Transform { j, sigma, n, input } => {
            let spec = spec(j, sigma, n)?;
            let text = read_input(input)?;
            let series: TruncatedSeries =
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("input series: {e}")))?;
            let out = apply_phi(&spec, &series)?;
            match requested.unwrap_or(Format::Json) {
                Format::Json => stdout.write_all(series_json(&out, format.precision)?.as_bytes())?,
                Format::Csv => {
                    let mut table = Table::new(&["l", "re", "im"]);
                    for (l, c) in out.coeffs().iter().enumerate() {
                        table.push(vec![Cell::Int(l as i64), c.re.into(), c.im.into()]);
                    }
                    table.emit(&mut stdout, format)?;
                }
            }
        }
    }
    stdout.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Rewrites every non-integer number in each JSON line with `precision`
/// significant digits, keeping key order.
fn reformat_json_lines(text: &str, precision: usize) -> Result<String, CliError> {
    fn write(v: &Value, precision: usize, out: &mut String) {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&format_number(x, precision));
            }
            Value::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(item, precision, out);
                }
                out.push(']');
            }
            Value::Object(map) => {
                out.push('{');
                for (i, (k, item)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&Value::String(k.clone()).to_string());
                    out.push(':');
                    write(item, precision, out);
                }
                out.push('}');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let value: Value = serde_json::from_str(line)?;
        write(&value, precision, &mut out);
        out.push('\n');
    }
    Ok(out)
}

fn report_csv(cases: &[bbr_core::verify::VerificationCase], precision: usize) -> Result<String, CliError> {
    let mut table = Table::new(&[
        "name", "k", "beta", "j", "sigma", "n", "tolerance", "measured", "status", "reason",
    ]);
    let num = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Num);
    for c in cases {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        table.push(vec![
            c.name.as_str().into(),
            num(c.params.map(|p| p.k)),
            num(c.params.map(|p| p.beta)),
            c.spec.map_or(Cell::Text(String::new()), |s| Cell::Int(s.j.index() as i64)),
            num(c.spec.map(|s| s.sigma)),
            c.spec.map_or(Cell::Text(String::new()), |s| Cell::Int(s.n as i64)),
            c.tolerance.into(),
            num(c.measured),
            status.into(),
            c.reason.clone().unwrap_or_default().into(),
        ]);
    }
    let mut buf = Vec::new();
    table.write_csv(&mut buf, precision)?;
    String::from_utf8(buf).map_err(|e| CliError::Parse(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
