use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Vector2;

use vtps::allocation::{to_physical, ActuatorLimits, Allocator, ForceLimits};
use vtps::command::ActuatorCommand;
use vtps::force_model::{
    cfd_forces, fit_rudder_model, inflow_velocity, linearity_diagnostic, load_samples, scale_model,
    scaling_factor, BowThrusterModel, CfdSample, FullForceModel, ScalingParams,
};
use vtps::harness::{builtin, emit_trace, run_scenario, write_trace, PathSpec, ScenarioConfig};
use vtps::{Error, Result};

#[derive(Parser)]
#[command(name = "vtps", version, about = "Twin-rudder positioning toolkit")]
struct Cli {
    /// Run seed (sensor noise and gust pulses).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Waypoint file (`x0 y0 psi` per line) replacing the scenario path.
    #[arg(long, global = true)]
    path: Option<PathBuf>,
    /// Force-data CSV (`delta_p_deg,delta_s_deg,x_ct_n,y_ct_n`).
    #[arg(long, global = true)]
    force_data: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the rudder force model and print V~, f_itcp and the hover angle.
    Fit,
    /// Allocate one required force vector to actuator commands.
    Allocate {
        #[arg(allow_negative_numbers = true)]
        x_req: f64,
        #[arg(allow_negative_numbers = true)]
        y_req: f64,
        #[arg(allow_negative_numbers = true)]
        n_req: f64,
    },
    /// Run a docking scenario and write its trace.
    Run {
        /// Built-in scenario: a, b, c or crash-stop.
        #[arg(long, default_value = "a", conflicts_with = "config")]
        scenario: String,
        /// Scenario TOML file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Switch the gusts off.
        #[arg(long)]
        calm: bool,
    },
    /// Rescale the fitted model between two ships.
    Scale {
        /// Source ship: rho,a_r,k_x,c_1,mu,d_p,n
        #[arg(long, value_parser = parse_scaling)]
        from: ScalingParams,
        /// Target ship, same fields.
        #[arg(long, value_parser = parse_scaling)]
        to: ScalingParams,
    },
    /// Print a complete scenario config.
    DumpConfig {
        #[arg(long, default_value = "a")]
        scenario: String,
    },
}

fn parse_scaling(s: &str) -> std::result::Result<ScalingParams, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let [rho, a_r, k_x, c_1, mu, d_p, n] = v[..] else {
        return Err(format!(
            "expected 7 comma-separated values, got {}",
            v.len()
        ));
    };
    ScalingParams::new(rho, a_r, k_x, c_1, mu, d_p, n).map_err(|e| e.to_string())
}

fn samples(force_data: Option<&Path>) -> Result<Vec<CfdSample>> {
    match force_data {
        Some(p) => load_samples(p),
        None => Ok(cfd_forces()),
    }
}

fn model(force_data: Option<&Path>) -> Result<FullForceModel> {
    Ok(FullForceModel::new(
        fit_rudder_model(&samples(force_data)?)?,
        BowThrusterModel::default(),
    ))
}

fn output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fit(cli: &Cli) -> Result<()> {
    let data = samples(cli.force_data.as_deref())?;
    let m = fit_rudder_model(&data)?;
    let v = m.v_tilde();
    let f = m.f_itcp();
    let h = m.hover_angle();
    let mut s = String::new();
    s += &format!("samples      {}\n", data.len());
    s += &format!("V~           [{:.4}, {:.4}]\n", v[(0, 0)], v[(0, 1)]);
    s += &format!("             [{:.4}, {:.4}]\n", v[(1, 0)], v[(1, 1)]);
    s += &format!("f_itcp       [{:.4}, {:.4}]\n", f[0], f[1]);
    s += &format!("hover_angle  [{:.2}, {:.2}]\n", h[0], h[1]);
    if let Some(r) = linearity_diagnostic(&m, &data) {
        s += &format!("max_residual [{:.4}, {:.4}]\n", r.max[0], r.max[1]);
    }
    output(cli.out.as_deref(), &s)
}

fn allocate(cli: &Cli, x: f64, y: f64, n: f64) -> Result<()> {
    let m = model(cli.force_data.as_deref())?;
    let alloc = Allocator::new(&Default::default(), &m)?;
    let (f, sat) = ForceLimits::default().saturate(&nalgebra::Vector3::new(x, y, n));
    let u = alloc.allocate(&f);
    let h = m.hover_angle();
    let hover = ActuatorCommand::new(h[0], h[1], 0.0);
    // One step long enough for the rudders to reach any target in range.
    let cmd = to_physical(&u, &m, &ActuatorLimits::vtps(), &hover, 10.0);
    let mut s = String::new();
    s += &format!(
        "f_req     [{:.4}, {:.4}, {:.4}]\n",
        f.x_req, f.y_req, f.n_req
    );
    if sat.any() {
        s += &format!("saturated [{}, {}, {}]\n", sat.surge, sat.sway, sat.yaw);
    }
    s += &format!(
        "u         [{:.4}, {:.4}, {:.4}]\n",
        u.delta_p, u.delta_s, u.n_b_sq
    );
    s += &format!("delta_p   {:.4}\n", cmd.delta_p);
    s += &format!("delta_s   {:.4}\n", cmd.delta_s);
    s += &format!("n_b       {:.4}\n", cmd.n_b);
    output(cli.out.as_deref(), &s)
}

fn scenario_config(cli: &Cli, name: &str, config: Option<&Path>) -> Result<ScenarioConfig> {
    let mut cfg = match config {
        Some(p) => ScenarioConfig::load(p)?,
        None => builtin(name).ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))?,
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(p) = &cli.path {
        cfg.path = PathSpec::File { file: p.clone() };
    }
    if let Some(p) = &cli.force_data {
        cfg.force_data = Some(p.clone());
    }
    Ok(cfg)
}

fn run(cli: &Cli, scenario: &str, config: Option<&Path>, calm: bool) -> Result<()> {
    let mut cfg = scenario_config(cli, scenario, config)?;
    if calm {
        cfg = cfg.calm();
    }
    let out = run_scenario(&cfg)?;
    match &cli.out {
        Some(p) => {
            emit_trace(&out.trace, p)?;
            println!("{}", out.summary);
        }
        None => {
            write_trace(io::stdout().lock(), &out.trace)?;
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

fn scale(cli: &Cli, from: &ScalingParams, to: &ScalingParams) -> Result<()> {
    let m = model(cli.force_data.as_deref())?;
    let k = scaling_factor(from, to)?;
    let scaled = scale_model(&m, k)?;
    let v = scaled.rudder.v_tilde();
    let f = scaled.rudder.f_itcp();
    let h = scaled.hover_angle();
    let probe = scaled.rudder.forces_from_relative(&Vector2::new(10.0, 0.0));
    let mut s = String::new();
    s += &format!("u_R_from     {:.6} m/s\n", inflow_velocity(from));
    s += &format!("u_R_to       {:.6} m/s\n", inflow_velocity(to));
    s += &format!("factor       {k:.6}\n");
    s += &format!("V~           [{:.6}, {:.6}]\n", v[(0, 0)], v[(0, 1)]);
    s += &format!("             [{:.6}, {:.6}]\n", v[(1, 0)], v[(1, 1)]);
    s += &format!("f_itcp       [{:.6}, {:.6}]\n", f[0], f[1]);
    s += &format!("hover_angle  [{:.2}, {:.2}]\n", h[0], h[1]);
    s += &format!("c_b          {:.6e}\n", scaled.bow.c_b);
    s += &format!("F(+10 deg p) [{:.6}, {:.6}]\n", probe[0], probe[1]);
    output(cli.out.as_deref(), &s)
}

fn dump_config(cli: &Cli, scenario: &str) -> Result<()> {
    let cfg = scenario_config(cli, scenario, None)?;
    output(cli.out.as_deref(), &cfg.to_toml())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit => fit(&cli),
        Command::Allocate {
            x_req,
            y_req,
            n_req,
        } => allocate(&cli, *x_req, *y_req, *n_req),
        Command::Run {
            scenario,
            config,
            calm,
        } => run(&cli, scenario, config.as_deref(), *calm),
        Command::Scale { from, to } => scale(&cli, from, to),
        Command::DumpConfig { scenario } => dump_config(&cli, scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vtps: {e}");
            ExitCode::from(1)
        }
    }
}
