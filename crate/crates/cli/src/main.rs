//! `carplan`: solve, trace, export and draw minimum-time car maneuvers.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use carplan::export::{point_cloud_csv, slice_csv, trajectory_csv};
use carplan::field_io::SavedField;
use carplan::grid::{Config, GridSpec};
use carplan::oracle::{compare_fields, dijkstra_travel_time};
use carplan::render::render_svg;
use carplan::scene::{bundled, load_scene, Scene, BUNDLED};
use carplan::solver::{solve, SolveResult, SolverParams};
use carplan::trajectory::{ControlMode, TraceParams, Tracer, Trajectory};
use carplan::Error;

const EXIT_OTHER: u8 = 1;
const EXIT_LOAD: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;
const EXIT_TRAJECTORY: u8 = 5;
const EXIT_COMPAT: u8 = 6;

#[derive(Parser)]
#[command(
    name = "carplan",
    version,
    about = "Minimum-time planning for a rectangular car"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the travel-time field and save it.
    Solve {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output container.
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace an optimal path and write it as CSV.
    Trace {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        start: StartArgs,
        /// Control recovery along the path.
        #[arg(long, value_enum, default_value_t = Mode::Feedback)]
        mode: Mode,
        /// Output CSV (`t,x,y,theta,v,omega`); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the path as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write the field at one heading as `x,y,u` CSV.
    Slice {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        field: FieldArgs,
        /// Heading in radians.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write every finite node as `x,y,theta,u` CSV.
    Cloud {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        field: FieldArgs,
        /// Keep only nodes with `u` at most this.
        #[arg(long)]
        max_value: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the scene, optionally with a traced path, as SVG.
    Render {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        field: FieldArgs,
        /// Trace from this start (needs a field).
        #[command(flatten)]
        start: OptStartArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the solver against the graph-search reference.
    Oracle {
        #[command(flatten)]
        scene: SceneArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// Edge length in grid cells.
        #[arg(long, default_value_t = 1)]
        step_count: usize,
    },
    /// List the bundled scenes.
    Scenes,
}

#[derive(Args)]
struct SceneArg {
    /// Scene file, or the name of a bundled scene.
    #[arg(long)]
    scene: String,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Cell counts `N` (all axes) or `I,J,K`.
    #[arg(long, default_value = "100")]
    grid: String,
    /// Convergence tolerance on the per-iteration change.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Cap on outer iterations.
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

#[derive(Args)]
struct FieldArgs {
    /// Saved field; solved on the fly from the solver options when omitted.
    #[arg(long)]
    field: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct StartArgs {
    /// Start configuration `x,y,theta`.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Named start from the scene file.
    #[arg(long)]
    start_name: Option<String>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptStartArgs {
    /// Start configuration `x,y,theta`.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    /// Named start from the scene file.
    #[arg(long)]
    start_name: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Feedback,
    Recorded,
}

/// An error together with the process exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
            Some(Error::Scene { .. }) => EXIT_LOAD,
            Some(Error::Compatibility(_)) => EXIT_COMPAT,
            Some(Error::Collision { .. }) | Some(Error::Unreachable(_)) => EXIT_TRAJECTORY,
            _ => EXIT_OTHER,
        };
        Self { code, err }
    }
}

fn fail(code: u8, err: anyhow::Error) -> Failure {
    Failure { code, err }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load(arg: &SceneArg) -> CliResult<Scene> {
    let path = Path::new(&arg.scene);
    if path.exists() {
        let (scene, warnings) = load_scene(path).map_err(|e| fail(EXIT_LOAD, e.into()))?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        return Ok(scene);
    }
    bundled(&arg.scene).ok_or_else(|| {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        fail(
            EXIT_LOAD,
            anyhow!(
                "no scene file '{}' and no bundled scene of that name (bundled: {})",
                arg.scene,
                names.join(", ")
            ),
        )
    })
}

fn parse_grid(scene: &Scene, text: &str) -> CliResult<GridSpec> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --grid '{text}': expected N or I,J,K"))?;
    let (ni, nj, nk) = match parts[..] {
        [n] => (n, n, n),
        [i, j, k] => (i, j, k),
        _ => return Err(anyhow!("bad --grid '{text}': expected N or I,J,K").into()),
    };
    let spec = GridSpec::new(scene.bounds, ni, nj, nk)?;
    let off = spec.off_grid_distance(scene.goal)?;
    if off > 1e-6 {
        eprintln!(
            "warning: goal lies {off:.3e} from the nearest grid node; the solver pins the goal to that node"
        );
    }
    Ok(spec)
}

fn parse_config(text: &str) -> CliResult<Config> {
    let v: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad configuration '{text}': expected x,y,theta"))?;
    match v[..] {
        [x, y, t] => Ok(Config::new(x, y, t)),
        _ => Err(anyhow!("bad configuration '{text}': expected x,y,theta").into()),
    }
}

fn start_config(
    scene: &Scene,
    start: &Option<String>,
    name: &Option<String>,
) -> CliResult<Option<Config>> {
    match (start, name) {
        (Some(s), _) => parse_config(s).map(Some),
        (None, Some(n)) => scene
            .start(n)
            .map(Some)
            .ok_or_else(|| anyhow!("scene has no start named '{n}'").into()),
        (None, None) => Ok(None),
    }
}

fn run_solver(scene: &Scene, args: &SolverArgs) -> CliResult<SolveResult> {
    let spec = parse_grid(scene, &args.grid)?;
    let params = SolverParams {
        eps: args.eps,
        max_outer: args.max_iters,
        ..SolverParams::default()
    };
    let r = solve(scene, spec, params)?;
    eprintln!(
        "grid {}x{}x{}: {} outer iterations, final change {:.3e}, converged {}",
        spec.ni(),
        spec.nj(),
        spec.nk(),
        r.outer_iterations,
        r.final_residual,
        r.converged
    );
    Ok(r)
}

fn field(scene: &Scene, args: &FieldArgs) -> CliResult<SolveResult> {
    match &args.field {
        Some(path) => {
            let saved = SavedField::load(path)
                .with_context(|| format!("reading field {}", path.display()))
                .map_err(|e| {
                    let code = match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
                        Some(Error::Compatibility(_)) => EXIT_COMPAT,
                        _ => EXIT_LOAD,
                    };
                    fail(code, e)
                })?;
            saved.check_compatible(scene)?;
            Ok(saved.result)
        }
        None => run_solver(scene, &args.solver),
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(anyhow::Error::from(e).context("writing to stdout").into())
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn trace(scene: &Scene, r: &SolveResult, q: Config, mode: Mode) -> CliResult<Trajectory> {
    let tp = TraceParams {
        mode: match mode {
            Mode::Feedback => ControlMode::Feedback,
            Mode::Recorded => ControlMode::Recorded,
        },
        ..TraceParams::for_grid(r.spec())
    };
    let t = Tracer::new(r, scene).integrate(q, &tp)?;
    eprintln!(
        "duration {:.4}, {} kinks, reached goal {}",
        t.duration, t.kink_count, t.reached_goal
    );
    Ok(t)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve { scene, solver, out } => {
            let scene = load(&scene)?;
            let r = run_solver(&scene, &solver)?;
            let converged = r.converged;
            let saved = SavedField {
                result: r,
                car: scene.car,
                goal: scene.goal,
                eps: solver.eps,
            };
            saved
                .save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            if !converged {
                return Err(fail(
                    EXIT_NOT_CONVERGED,
                    anyhow!(
                        "no convergence within {} outer iterations; field saved anyway",
                        solver.max_iters
                    ),
                ));
            }
        }
        Command::Trace {
            scene,
            field: fa,
            start,
            mode,
            out,
            svg,
        } => {
            let scene = load(&scene)?;
            let q = start_config(&scene, &start.start, &start.start_name)?
                .expect("clap enforces a start");
            let r = field(&scene, &fa)?;
            let t = trace(&scene, &r, q, mode)?;
            write_out(&out, &trajectory_csv(&t))?;
            if let Some(p) = svg {
                std::fs::write(&p, render_svg(&scene, Some(&t)))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if !t.reached_goal {
                return Err(fail(
                    EXIT_TRAJECTORY,
                    anyhow!("goal not reached within the time cap; partial path written"),
                ));
            }
        }
        Command::Slice {
            scene,
            field: fa,
            theta,
            out,
        } => {
            let scene = load(&scene)?;
            let r = field(&scene, &fa)?;
            write_out(&out, &slice_csv(&r.u, theta)?)?;
        }
        Command::Cloud {
            scene,
            field: fa,
            max_value,
            out,
        } => {
            let scene = load(&scene)?;
            let r = field(&scene, &fa)?;
            write_out(&out, &point_cloud_csv(&r.u, max_value))?;
        }
        Command::Render {
            scene,
            field: fa,
            start,
            out,
        } => {
            let scene = load(&scene)?;
            let traj = match start_config(&scene, &start.start, &start.start_name)? {
                Some(q) => {
                    let r = field(&scene, &fa)?;
                    Some(trace(&scene, &r, q, Mode::Feedback)?)
                }
                None => None,
            };
            std::fs::write(&out, render_svg(&scene, traj.as_ref()))
                .with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Oracle {
            scene,
            solver,
            step_count,
        } => {
            let scene = load(&scene)?;
            let r = run_solver(&scene, &solver)?;
            let o = dijkstra_travel_time(&scene, r.spec(), step_count)?;
            let c = compare_fields(&r.u, &o)?;
            println!("both_finite {}", c.both_finite);
            println!("only_solver_finite {}", c.only_first_finite);
            println!("only_oracle_finite {}", c.only_second_finite);
            println!("max_abs {}", c.max_abs);
            println!("mean_abs {}", c.mean_abs);
            println!("median_abs {}", c.median_abs);
            println!("p90_abs {}", c.p90_abs);
            println!("p99_abs {}", c.p99_abs);
        }
        Command::Scenes => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
