//! `secant`: experiments on the secant map of a real polynomial.
//!
//! Exit status is 0 on success, 1 on a usage or I/O error and 2 when the
//! numerics fail (multiple roots, no cycle, a failed check).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use secant_core::basins::{analyze_immediate, compute_grid, BasinGrid};
use secant_core::cycles::{
    construct_polynomial, default_scale, find_four_cycles, CycleType, SearchParams,
};
use secant_core::render::{
    delta_s_contour, render_ppm, write_critical_csv, write_polylines_csv, Overlays, Palette,
};
use secant_core::{verify, OrbitOutcome, OrbitParams, Point, Polynomial, Rect, SecantSystem};

#[derive(Parser)]
#[command(name = "secant", version, about = "Dynamics of the secant map of a real polynomial")]
struct Cli {
    /// Worker threads for grid classification (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the simple real roots.
    Roots {
        #[command(flatten)]
        poly: PolyArg,
    },
    /// Trace one orbit.
    Orbit {
        #[command(flatten)]
        poly: PolyArg,
        /// Starting point `x,y`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        seed: (f64, f64),
        #[command(flatten)]
        iter: IterArgs,
        /// Write the orbit as CSV `iter,x,y`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a grid of seeds by the root they converge to.
    Basin {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Write a PPM image.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the raw grid in the binary `SBG1` format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Analyse the immediate basin of an internal root.
    Immediate {
        #[command(flatten)]
        poly: PolyArg,
        /// Index of the root in ascending order.
        #[arg(long)]
        root: usize,
        #[command(flatten)]
        grid: GridArgs,
        /// Random mask samples for the forward-invariance check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write a PPM image with the basin highlighted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find or construct 4-cycles.
    Cycles {
        #[command(subcommand)]
        command: CyclesCommand,
    },
    /// Export the critical curves and the singular set as CSV.
    Curves {
        #[command(flatten)]
        poly: PolyArg,
        /// Index of the middle root of the triple.
        #[arg(long)]
        root: usize,
        /// Samples along the critical curves.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Marching-squares resolution for the singular set.
        #[arg(long, default_value_t = 512)]
        res: usize,
        /// Bounds for the singular set (default: the square R, enlarged).
        #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
        bounds: Option<Rect>,
        /// Output prefix; writes `<out>_critical.csv` and `<out>_delta_s.csv`.
        #[arg(long, default_value = "curves")]
        out: PathBuf,
    },
    /// Run the acceptance suite.
    Verify {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<usize>,
        /// Write the results as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CyclesCommand {
    /// Search a square for 4-cycles by damped Newton.
    Find {
        #[command(flatten)]
        poly: PolyArg,
        /// Search box (default: the roots' hull, widened by 1).
        #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
        bounds: Option<Rect>,
        /// Newton seeds per axis.
        #[arg(long, default_value_t = SearchParams::default().grid_density)]
        density: usize,
        /// Newton residual tolerance.
        #[arg(long, default_value_t = SearchParams::default().newton_tol)]
        tol: f64,
        /// Newton iterations per seed.
        #[arg(long, default_value_t = SearchParams::default().max_newton_iter)]
        max_iter: usize,
    },
    /// Build a cubic with a 4-cycle of the given type.
    Construct {
        /// I, II, III or IV.
        #[arg(long = "type")]
        cycle_type: CycleType,
        /// Three increasing values `v1,v2,v3`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        base: [f64; 3],
        /// Value of p at the solved letter (default depends on the type).
        #[arg(long, allow_hyphen_values = true)]
        scale: Option<f64>,
    },
}

#[derive(Args)]
struct PolyArg {
    /// Ascending coefficients `a0,a1,...` or `cheb:k`.
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Args)]
struct IterArgs {
    /// Convergence radius around (alpha, alpha).
    #[arg(long, default_value_t = OrbitParams::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = OrbitParams::default().max_iter)]
    max_iter: u32,
}

#[derive(Args)]
struct GridArgs {
    /// `x0,x1,y0,y1`.
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    bounds: Option<Rect>,
    /// Cells per axis.
    #[arg(long, default_value_t = 512)]
    res: usize,
    #[command(flatten)]
    iter: IterArgs,
}

impl IterArgs {
    fn params(&self) -> Result<OrbitParams, Failure> {
        if !(self.tol > 0.0 && self.tol.is_finite()) || self.max_iter == 0 {
            return Err(Failure::Usage("--tol must be positive and --max-iter nonzero".into()));
        }
        Ok(OrbitParams {
            max_iter: self.max_iter,
            tol: self.tol,
        })
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("not a finite number: {t:?}"))
        })
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [x, y] => Ok((*x, *y)),
        v => Err(format!("expected 2 values, got {}", v.len())),
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    match parse_list(s)?.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        v => Err(format!("expected 3 values, got {}", v.len())),
    }
}

fn parse_bounds(s: &str) -> Result<Rect, String> {
    match parse_list(s)?.as_slice() {
        [x0, x1, y0, y1] => {
            let r = Rect::new(*x0, *x1, *y0, *y1);
            if r.is_valid() {
                Ok(r)
            } else {
                Err("bounds need x0 < x1 and y0 < y1".into())
            }
        }
        v => Err(format!("expected x0,x1,y0,y1, got {} values", v.len())),
    }
}

fn system(arg: &PolyArg) -> Result<SecantSystem, Failure> {
    let poly: Polynomial = arg.poly.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
    SecantSystem::new(poly).map_err(numerical)
}

/// Square around all roots with a quarter of their spread (at least 0.5)
/// on every side.
fn default_bounds(sys: &SecantSystem) -> Result<Rect, Failure> {
    let (lo, hi) = root_hull(sys)?;
    let pad = (0.25 * (hi - lo)).max(0.5);
    Ok(Rect::square(lo - pad, hi + pad))
}

fn root_hull(sys: &SecantSystem) -> Result<(f64, f64), Failure> {
    let r = sys.roots().roots();
    match (r.first(), r.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Failure::Numerical("no real roots; pass --bounds".into())),
    }
}

fn check_res(res: usize) -> Result<(), Failure> {
    if res == 0 || res > 16_384 {
        return Err(Failure::Usage(format!("--res {res} out of range 1..=16384")));
    }
    Ok(())
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))?;
    say(&s);
    Ok(())
}

/// Prints a line to stdout; a closed pipe is not an error.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

/// Ten decimals with trailing zeros removed; negative zero prints as `0`.
fn fmt_root(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))
}

fn grid_for(sys: &SecantSystem, bounds: Rect, args: &GridArgs) -> Result<BasinGrid, Failure> {
    check_res(args.res)?;
    compute_grid(sys, bounds, args.res, args.res, &args.iter.params()?).map_err(numerical)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Roots { poly } => {
            let sys = system(&poly)?;
            let out: Vec<String> = sys.roots().iter().map(fmt_root).collect();
            say(&out.join(" "));
        }
        Command::Orbit {
            poly,
            seed,
            iter,
            out,
        } => {
            let sys = system(&poly)?;
            let (res, trace) = sys.orbit_trace(Point::new(seed.0, seed.1), &iter.params()?);
            if let Some(path) = out {
                let mut w = create(&path)?;
                writeln!(w, "iter,x,y")?;
                for (i, p) in trace.iter().enumerate() {
                    writeln!(w, "{i},{},{}", p.x, p.y)?;
                }
                w.flush()?;
            }
            let root = match res.outcome {
                OrbitOutcome::Converged(i) => json!(sys.roots().roots()[i]),
                _ => json!(null),
            };
            print_json(&json!({ "orbit": res, "root": root, "points": trace.len() }))?;
        }
        Command::Basin {
            poly,
            grid,
            out,
            dump,
        } => {
            let sys = system(&poly)?;
            let bounds = match grid.bounds {
                Some(b) => b,
                None => default_bounds(&sys)?,
            };
            let g = grid_for(&sys, bounds, &grid)?;
            if let Some(path) = dump {
                g.write_binary(create(&path)?)?;
            }
            if let Some(path) = out {
                render_ppm(&g, &Palette::for_roots(sys.roots().len()), &Overlays::default(), &path)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            print_json(&json!({
                "roots": sys.roots().roots(),
                "summary": g.summary(sys.roots().len()),
            }))?;
        }
        Command::Immediate {
            poly,
            root,
            grid,
            samples,
            out,
        } => {
            let sys = system(&poly)?;
            if root >= sys.roots().len() {
                return Err(Failure::Usage(format!(
                    "--root {root}: only {} roots",
                    sys.roots().len()
                )));
            }
            let triple = sys.triple(root).ok();
            let bounds = match grid
                .bounds
                .or_else(|| triple.as_ref().map(|t| t.region().expanded(0.05)))
            {
                Some(b) => b,
                None => default_bounds(&sys)?,
            };
            let g = grid_for(&sys, bounds, &grid)?;
            let cycle = triple.as_ref().and_then(|t| {
                find_four_cycles(&sys, &t.region().expanded(0.05), &SearchParams::default())
                    .cycles
                    .into_iter()
                    .find(|c| c.cycle_type == CycleType::I)
            });
            let params = grid.iter.params()?;
            let (ib, report) =
                analyze_immediate(&g, &sys, root, cycle.as_ref(), &params, samples).map_err(numerical)?;
            if let Some(path) = out {
                let overlays = Overlays {
                    immediate: Some(&ib),
                    focal_points: sys.focal_points().iter().map(|f| f.location).collect(),
                    cycle_points: cycle.iter().flat_map(|c| c.orbit_points()).collect(),
                    ..Overlays::default()
                };
                render_ppm(&g, &Palette::for_roots(sys.roots().len()), &overlays, &path)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            print_json(&report)?;
        }
        Command::Cycles { command } => match command {
            CyclesCommand::Find {
                poly,
                bounds,
                density,
                tol,
                max_iter,
            } => {
                let sys = system(&poly)?;
                if density < 2 || !(tol > 0.0) || max_iter == 0 {
                    return Err(Failure::Usage(
                        "--density must be at least 2, --tol positive, --max-iter nonzero".into(),
                    ));
                }
                let rect = match bounds {
                    Some(b) => b,
                    None => {
                        let (lo, hi) = root_hull(&sys)?;
                        Rect::square(lo - 1.0, hi + 1.0)
                    }
                };
                let params = SearchParams {
                    grid_density: density,
                    newton_tol: tol,
                    max_newton_iter: max_iter,
                    ..SearchParams::default()
                };
                let found = find_four_cycles(&sys, &rect, &params);
                let cycles: Vec<_> = found.cycles.iter().map(|c| c.report()).collect();
                print_json(&json!({ "cycles": cycles, "anomalies": found.anomalies }))?;
            }
            CyclesCommand::Construct {
                cycle_type,
                base,
                scale,
            } => {
                let scale = scale.unwrap_or_else(|| default_scale(cycle_type));
                let c = construct_polynomial(cycle_type, base, scale).map_err(numerical)?;
                print_json(&c.report())?;
            }
        },
        Command::Curves {
            poly,
            root,
            samples,
            res,
            bounds,
            out,
        } => {
            let sys = system(&poly)?;
            check_res(res)?;
            if samples == 0 {
                return Err(Failure::Usage("--samples must be positive".into()));
            }
            let triple = sys.triple(root).map_err(numerical)?;
            let curves = sys.critical_curves(&triple, samples).map_err(numerical)?;
            let bounds = bounds.unwrap_or_else(|| triple.region().expanded(0.25));
            let delta = delta_s_contour(&sys, bounds, res);
            let stem = out.to_string_lossy().to_string();
            let crit_path = PathBuf::from(format!("{stem}_critical.csv"));
            let delta_path = PathBuf::from(format!("{stem}_delta_s.csv"));
            write_critical_csv(create(&crit_path)?, &curves)?;
            write_polylines_csv(create(&delta_path)?, &delta)?;
            print_json(&json!({
                "gamma0": curves.gamma0,
                "xi": curves.xi,
                "shape": curves.shape,
                "critical_csv": crit_path,
                "delta_s_csv": delta_path,
                "delta_s_polylines": delta.len(),
            }))?;
        }
        Command::Verify { criterion, out } => {
            let ids: Vec<usize> = match criterion {
                Some(id) if (1..=verify::TITLES.len()).contains(&id) => vec![id],
                Some(id) => return Err(Failure::Usage(format!("no criterion {id}"))),
                None => (1..=verify::TITLES.len()).collect(),
            };
            let mut results = Vec::new();
            for id in ids {
                let r = verify::run(id);
                say(&r.line());
                results.push(r);
            }
            if let Some(path) = out {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &results)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                w.flush()?;
            }
            let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            if !failed.is_empty() {
                return Err(Failure::Numerical(format!("failed criteria {failed:?}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
