use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use weyl_cli::commands::{CouetteArgs, CylinderArgs};
use weyl_cli::{cmd_couette, cmd_cylinder, cmd_fluid_check, cmd_solve, cmd_verify, Overrides};

const EXIT_CODES: &str = "\
Exit codes:
  0  success (fluid-check: certificate computed)
  1  elliptic solve did not converge, or the fluid fixed-point sweep diverged
  2  configuration, input file or grid mismatch error
  3  a residual, exactness or analyticity check failed
  4  cylinder: zero boundary velocity, no solution determined";

/// Axisymmetric boundary value problems for the Weyl metric.
#[derive(Debug, Parser)]
#[command(name = "weyl", version, after_help = EXIT_CODES)]
struct Cli {
    /// Directory for output artifacts.
    #[arg(long, global = true, env = "WEYL_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridOverrides {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Node count in both directions.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_rho: Option<usize>,
    #[arg(long)]
    n_z: Option<usize>,
    /// Relative tolerance of the elliptic solve.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Pass threshold for the equation residuals.
    #[arg(long)]
    residual_tolerance: Option<f64>,
}

impl GridOverrides {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            n_rho: self.n_rho,
            n_z: self.n_z,
            tolerance: self.tolerance,
            residual_tolerance: self.residual_tolerance,
            ..Overrides::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for psi, reconstruct gamma and check every equation.
    #[command(after_help = EXIT_CODES)]
    Solve(GridOverrides),
    /// Check psi.csv and gamma.csv against the equations on the declared grid.
    #[command(after_help = EXIT_CODES)]
    Verify {
        #[command(flatten)]
        grid: GridOverrides,
        #[arg(long, default_value = "psi.csv")]
        psi: PathBuf,
        #[arg(long, default_value = "gamma.csv")]
        gamma: PathBuf,
    },
    /// Non-existence certificate for a fluid at rest with energy density epsilon.
    #[command(after_help = EXIT_CODES)]
    FluidCheck {
        #[command(flatten)]
        grid: GridOverrides,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Coupling constant K.
        #[arg(long)]
        coupling: Option<f64>,
    },
    /// Closed-form flow outside a cylinder moving along its axis.
    #[command(after_help = EXIT_CODES)]
    Cylinder {
        #[arg(long)]
        radius: f64,
        #[arg(long, allow_hyphen_values = true)]
        v_r: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        psi_r: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        gamma_r: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Sample radii run over [R, outer * R].
        #[arg(long, default_value_t = 10.0)]
        outer: f64,
    },
    /// Newtonian flow between two coaxial cylinders.
    #[command(after_help = EXIT_CODES)]
    Couette {
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[arg(long, allow_hyphen_values = true)]
        v1: f64,
        #[arg(long, allow_hyphen_values = true)]
        v2: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = &cli.output_dir;
    let result = match &cli.command {
        Command::Solve(g) => cmd_solve(&g.config, &g.overrides(), out),
        Command::Verify { grid, psi, gamma } => {
            cmd_verify(&grid.config, psi, gamma, &grid.overrides(), out)
        }
        Command::FluidCheck {
            grid,
            epsilon,
            coupling,
        } => {
            let o = Overrides {
                epsilon: *epsilon,
                coupling: *coupling,
                ..grid.overrides()
            };
            cmd_fluid_check(&grid.config, &o, out)
        }
        Command::Cylinder {
            radius,
            v_r,
            psi_r,
            gamma_r,
            samples,
            outer,
        } => cmd_cylinder(
            &CylinderArgs {
                radius: *radius,
                v_r: *v_r,
                psi_r: *psi_r,
                gamma_r: *gamma_r,
                samples: *samples,
                outer: *outer,
            },
            out,
        ),
        Command::Couette {
            r1,
            r2,
            v1,
            v2,
            samples,
        } => cmd_couette(
            &CouetteArgs {
                r1: *r1,
                r2: *r2,
                v1: *v1,
                v2: *v2,
                samples: *samples,
            },
            out,
        ),
    };
    match result {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{}", o.summary);
            for f in &o.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
