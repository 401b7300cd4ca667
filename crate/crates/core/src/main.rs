use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use resonant_screen::averaging::{self, make_field, QuadratureField};
use resonant_screen::config::RunConfig;
use resonant_screen::generating::{self, Amplitudes, GeneratingBasis};
use resonant_screen::simulator::{self, PeriodicOrbit};
use resonant_screen::Error;

/// Analyze and simulate a two-mass resonant screen with a one-sided stop.
#[derive(Parser)]
#[command(name = "resonant-screen", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Flat key=value configuration file; defaults cover every key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the machine-readable report or CSV here (default: stdout only).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Stop stiffness coefficient override.
    #[arg(long)]
    k1: Option<f64>,
    /// Perturbation scale override.
    #[arg(long)]
    eps: Option<f64>,
    /// Simulation end time override.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Integration step override.
    #[arg(long)]
    step: Option<f64>,
    /// Continuation endpoint override.
    #[arg(long = "k1-max")]
    k1_max: Option<f64>,
    /// Continuation grid intervals override.
    #[arg(long)]
    steps: Option<usize>,
    /// Keep every n-th trajectory sample.
    #[arg(long)]
    thin: Option<usize>,
    /// Averaged-field strategy: closed | quadrature.
    #[arg(long)]
    field: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Report the generating basis and every applicability condition.
    Analyze(CommonOpts),
    /// Averaged coefficients, zero, spectrum and stability verdict.
    Average(CommonOpts),
    /// Locate the periodic orbit and report Floquet/harmonic diagnostics.
    Orbit(CommonOpts),
    /// Integrate the full equations of motion and emit a trajectory CSV.
    Simulate(CommonOpts),
    /// Continue the averaged zero in the stop stiffness; emit a CSV table.
    Continue(CommonOpts),
    /// Rerun a canned scenario.
    Reproduce {
        scenario: Scenario,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    /// Two-frequency orbit with the stop engaged.
    Prop3,
    /// Single-harmonic regime without the stop.
    Fig2Left,
    /// Two-harmonic regime with the stop.
    Fig2Right,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(opts) => run(&opts, cmd_analyze),
        Command::Average(opts) => run(&opts, cmd_average),
        Command::Orbit(opts) => run(&opts, cmd_orbit),
        Command::Simulate(opts) => run(&opts, cmd_simulate),
        Command::Continue(opts) => run(&opts, cmd_continue),
        Command::Reproduce { scenario, opts } => run(&opts, |cfg, rep| cmd_reproduce(scenario, cfg, rep)),
    };
    match result {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    /// Usage, configuration or I/O problems: exit code 2.
    Config(String),
    /// Convergence or condition failures: exit code 1.
    Numeric(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::UnknownField(_) => RunError::Config(e.to_string()),
            other => RunError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Line-oriented `key value` report, printed and optionally mirrored to a file.
struct Report {
    lines: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn kv(&mut self, key: &str, value: impl AsRef<str>) {
        self.lines.push(format!("{key} {}", value.as_ref()));
    }

    fn kf(&mut self, key: &str, value: f64) {
        self.kv(key, fmt17(value));
    }

    fn finish(self, output: Option<&PathBuf>) -> Result<(), RunError> {
        let text = self.lines.join("\n") + "\n";
        print!("{text}");
        if let Some(path) = output {
            std::fs::write(path, &text)?;
        }
        Ok(())
    }
}

/// 17 significant digits: enough to round-trip f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run<F>(opts: &CommonOpts, body: F) -> Result<bool, RunError>
where
    F: FnOnce(&RunConfig, &CommonOpts) -> Result<bool, RunError>,
{
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path).map_err(|e| RunError::Config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(k1) = opts.k1 {
        cfg.params.k1_hat = k1;
    }
    if let Some(eps) = opts.eps {
        cfg.params.eps = eps;
    }
    if let Some(t_end) = opts.t_end {
        cfg.t_end = Some(t_end);
    }
    if let Some(step) = opts.step {
        cfg.step = Some(step);
    }
    if let Some(k1_max) = opts.k1_max {
        cfg.k1_max = k1_max;
    }
    if let Some(steps) = opts.steps {
        cfg.steps = steps;
    }
    if let Some(thin) = opts.thin {
        cfg.thin = thin.max(1);
    }
    if let Some(field) = &opts.field {
        cfg.field = field.clone();
    }
    if let Some(out) = &opts.output {
        cfg.output = Some(out.clone());
    }
    cfg.params.validate().map_err(|e| RunError::Config(e.to_string()))?;
    body(&cfg, opts)
}

fn cmd_analyze(cfg: &RunConfig, _opts: &CommonOpts) -> Result<bool, RunError> {
    let p = &cfg.params;
    let b = GeneratingBasis::new(p)?;
    let mut rep = Report::new();
    rep.kf("stiffness.a11", b.stiffness.a11);
    rep.kf("stiffness.a12", b.stiffness.a12);
    rep.kf("stiffness.a21", b.stiffness.a21);
    rep.kf("stiffness.a22", b.stiffness.a22);
    rep.kf("omega1", b.omega1);
    rep.kf("omega2", b.omega2);
    rep.kf("period", b.period);
    rep.kf("frequency_ratio", b.omega2 / b.omega1);
    rep.kv("resonance_order", cfg.params.l.to_string());
    let report = averaging::check_nondegeneracy(p, &b);
    for c in &report.conditions {
        rep.kv(&format!("condition.{}.lhs", c.name), fmt17(c.lhs));
        rep.kv(&format!("condition.{}.rhs", c.name), fmt17(c.rhs));
        rep.kv(&format!("condition.{}.holds", c.name), if c.holds { "true" } else { "false" });
    }
    let ok = report.all_hold();
    rep.kv("all_conditions_hold", if ok { "true" } else { "false" });
    rep.finish(cfg.output.as_ref())?;
    Ok(ok)
}

fn averaged_zero(cfg: &RunConfig, b: &GeneratingBasis) -> Result<(Amplitudes, averaging::StabilityCertificate), RunError> {
    let p = &cfg.params;
    let field = make_field(&cfg.field, p, b)?;
    let coeffs = averaging::coefficients(p, b);
    let seed = averaging::analytic_zero(&coeffs)?;
    let zero = averaging::newton_zero(field.as_ref(), &seed)?;
    let cert = averaging::stability_certificate(field.as_ref(), &zero)?;
    Ok((zero, cert))
}

fn write_certificate(rep: &mut Report, prefix: &str, cert: &averaging::StabilityCertificate) {
    for (i, e) in cert.eigenvalues.iter().enumerate() {
        rep.kf(&format!("{prefix}.eigenvalue{i}.re"), e.re);
        rep.kf(&format!("{prefix}.eigenvalue{i}.im"), e.im);
    }
    rep.kf(&format!("{prefix}.residual"), cert.residual);
    rep.kv(&format!("{prefix}.stable"), if cert.stable { "true" } else { "false" });
}

fn cmd_average(cfg: &RunConfig, _opts: &CommonOpts) -> Result<bool, RunError> {
    let p = &cfg.params;
    let b = GeneratingBasis::new(p)?;
    let coeffs = averaging::coefficients(p, &b);
    let scaled = coeffs.scaled(b.period);
    let mut rep = Report::new();
    for (name, mean, integral) in [
        ("alpha", coeffs.alpha, scaled.alpha),
        ("beta", coeffs.beta, scaled.beta),
        ("gamma", coeffs.gamma, scaled.gamma),
        ("sigma", coeffs.sigma, scaled.sigma),
        ("mu", coeffs.mu, scaled.mu),
    ] {
        rep.kf(&format!("coeff.{name}.mean"), mean);
        rep.kf(&format!("coeff.{name}.integral"), integral);
    }
    let analytic = averaging::analytic_zero(&coeffs)?;
    rep.kf("analytic_zero.a1c", analytic.a1c);
    rep.kf("analytic_zero.a1s", analytic.a1s);
    rep.kf("analytic_zero.a2c", analytic.a2c);
    rep.kf("analytic_zero.a2s", analytic.a2s);
    rep.kv("field", &cfg.field);
    rep.kf("k1_hat", p.k1_hat);
    let (zero, cert) = averaged_zero(cfg, &b)?;
    rep.kf("zero.a1c", zero.a1c);
    rep.kf("zero.a1s", zero.a1s);
    rep.kf("zero.a2c", zero.a2c);
    rep.kf("zero.a2s", zero.a2s);
    rep.kf("zero.a2_norm", zero.a2c.hypot(zero.a2s));
    write_certificate(&mut rep, "certificate", &cert);
    rep.finish(cfg.output.as_ref())?;
    Ok(true)
}

fn default_step(cfg: &RunConfig, b: &GeneratingBasis) -> f64 {
    cfg.step.unwrap_or(b.period / 8192.0)
}

fn locate_orbit(cfg: &RunConfig, b: &GeneratingBasis) -> Result<(PeriodicOrbit, Amplitudes), RunError> {
    let p = &cfg.params;
    // seed the shooting from the averaged prediction
    let field = QuadratureField::new(*p, *b);
    let coeffs = averaging::coefficients(p, b);
    let zero = averaging::newton_zero(&field, &averaging::analytic_zero(&coeffs)?)?;
    let v0 = generating::from_amplitudes(0.0, &zero, b);
    let s0 = generating::momenta_to_state(&v0, p);
    let orbit = simulator::find_fixed_point(p, &s0, default_step(cfg, b))?;
    Ok((orbit, zero))
}

fn write_orbit(rep: &mut Report, orbit: &PeriodicOrbit) {
    rep.kf("orbit.x1", orbit.initial.x1);
    rep.kf("orbit.x2", orbit.initial.x2);
    rep.kf("orbit.v1", orbit.initial.v1);
    rep.kf("orbit.v2", orbit.initial.v2);
    rep.kf("orbit.period", orbit.period);
    rep.kf("orbit.residual", orbit.residual);
    for (i, f) in orbit.floquet.iter().enumerate() {
        rep.kf(&format!("floquet{i}.re"), f.re);
        rep.kf(&format!("floquet{i}.im"), f.im);
        rep.kf(&format!("floquet{i}.modulus"), f.norm());
    }
    rep.kv("orbit.stable", if orbit.asymptotically_stable() { "true" } else { "false" });
    for (k, (c1, c2)) in orbit.harmonics_x1.iter().zip(&orbit.harmonics_x2).enumerate() {
        rep.kf(&format!("harmonic.x1.c{k}.modulus"), c1.norm());
        rep.kf(&format!("harmonic.x2.c{k}.modulus"), c2.norm());
    }
    if orbit.harmonics_x1[1].norm() > 0.0 {
        rep.kf(
            "harmonic.x1.ratio_2_to_1",
            orbit.harmonics_x1[2].norm() / orbit.harmonics_x1[1].norm(),
        );
    }
}

fn cmd_orbit(cfg: &RunConfig, _opts: &CommonOpts) -> Result<bool, RunError> {
    let p = &cfg.params;
    let b = GeneratingBasis::new(p)?;
    let (orbit, zero) = locate_orbit(cfg, &b)?;
    let mut rep = Report::new();
    write_orbit(&mut rep, &orbit);
    // sup-norm gap between the orbit and the averaged prediction
    let traj = simulator::integrate(p, &orbit.initial, 0.0, orbit.period, default_step(cfg, &b))?;
    let predict = simulator::averaged_prediction(&zero, &b);
    let mut gap = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let (x1, x2) = predict(*t);
        gap = gap.max((s.x1 - x1).abs()).max((s.x2 - x2).abs());
    }
    rep.kf("orbit.max_abs_x1", traj.max_abs_x1());
    rep.kf("orbit.max_abs_x2", traj.max_abs_x2());
    rep.kf("orbit.prediction_gap", gap);
    rep.finish(cfg.output.as_ref())?;
    Ok(true)
}

fn write_csv(path: Option<&PathBuf>, content: &str) -> Result<(), RunError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, _opts: &CommonOpts) -> Result<bool, RunError> {
    let p = &cfg.params;
    let b = GeneratingBasis::new(p)?;
    let h = default_step(cfg, &b);
    let t_end = cfg.t_end.unwrap_or(10.0 * b.period);
    let s0 = match &cfg.seed {
        Some(a) => generating::momenta_to_state(&generating::from_amplitudes(0.0, a, &b), p),
        None => {
            let field = QuadratureField::new(*p, b);
            let coeffs = averaging::coefficients(p, &b);
            let zero = averaging::newton_zero(&field, &averaging::analytic_zero(&coeffs)?)?;
            generating::momenta_to_state(&generating::from_amplitudes(0.0, &zero, &b), p)
        }
    };
    let traj = simulator::integrate(p, &s0, 0.0, t_end, h)?;
    let mut csv = String::from("t,x1,x2,v1,v2\n");
    for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        if i % cfg.thin != 0 {
            continue;
        }
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(*t),
            fmt17(s.x1),
            fmt17(s.x2),
            fmt17(s.v1),
            fmt17(s.v2)
        ));
    }
    write_csv(cfg.output.as_ref(), &csv)?;
    Ok(true)
}

fn cmd_continue(cfg: &RunConfig, _opts: &CommonOpts) -> Result<bool, RunError> {
    let p = &cfg.params;
    let b = GeneratingBasis::new(p)?;
    let path = averaging::continue_zero(p, &b, cfg.k1_max, cfg.steps)?;
    if path.points.is_empty() {
        return Err(RunError::Numeric("continuation failed at the first grid point".to_string()));
    }
    let mut csv = String::from("k1_hat,A1C,A1S,A2C,A2S,max_re_eig\n");
    for pt in &path.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(pt.k1_hat),
            fmt17(pt.zero.a1c),
            fmt17(pt.zero.a1s),
            fmt17(pt.zero.a2c),
            fmt17(pt.zero.a2s),
            fmt17(pt.certificate.max_real_part())
        ));
    }
    write_csv(cfg.output.as_ref(), &csv)?;
    if let Some(k1) = path.failed_at {
        eprintln!("warning: continuation stopped converging at k1_hat = {k1}");
    }
    Ok(true)
}

fn cmd_reproduce(scenario: Scenario, cfg: &RunConfig, opts: &CommonOpts) -> Result<bool, RunError> {
    let mut cfg = cfg.clone();
    match scenario {
        Scenario::Prop3 => {
            if opts.k1.is_none() {
                cfg.params.k1_hat = 25.0;
            }
            let b = GeneratingBasis::new(&cfg.params)?;
            let (orbit, zero) = locate_orbit(&cfg, &b)?;
            let mut rep = Report::new();
            rep.kf("k1_hat", cfg.params.k1_hat);
            rep.kf("zero.a1c", zero.a1c);
            rep.kf("zero.a1s", zero.a1s);
            rep.kf("zero.a2c", zero.a2c);
            rep.kf("zero.a2s", zero.a2s);
            rep.kf("zero.a2_norm", zero.a2c.hypot(zero.a2s));
            write_orbit(&mut rep, &orbit);
            let two_freq = zero.a2c.hypot(zero.a2s) > 0.0 && orbit.asymptotically_stable();
            rep.kv("two_frequency_certified", if two_freq { "true" } else { "false" });
            rep.finish(cfg.output.as_ref())?;
            Ok(two_freq)
        }
        Scenario::Fig2Left | Scenario::Fig2Right => {
            let with_stop = matches!(scenario, Scenario::Fig2Right);
            if opts.k1.is_none() {
                cfg.params.k1_hat = if with_stop { 25.0 } else { 0.0 };
            }
            let b = GeneratingBasis::new(&cfg.params)?;
            let (orbit, _) = locate_orbit(&cfg, &b)?;
            // the shape criterion is on the relative displacement x1 - x2
            let diff_ratio = |o: &PeriodicOrbit| {
                let c = |k: usize| (o.harmonics_x1[k] - o.harmonics_x2[k]).norm();
                c(2) / c(1)
            };
            let ratio = diff_ratio(&orbit);
            let mut rep = Report::new();
            rep.kf("k1_hat", cfg.params.k1_hat);
            write_orbit(&mut rep, &orbit);
            rep.kf("harmonic.diff.ratio_2_to_1", ratio);
            let verdict = if with_stop {
                // compare against the stop-free baseline
                let mut base_cfg = cfg.clone();
                base_cfg.params.k1_hat = 0.0;
                let (base, _) = locate_orbit(&base_cfg, &b)?;
                let base_ratio = diff_ratio(&base);
                rep.kf("baseline.ratio_2_to_1", base_ratio);
                ratio >= 10.0 * base_ratio && orbit.asymptotically_stable()
            } else {
                ratio <= 0.01 && orbit.asymptotically_stable()
            };
            rep.kv("criterion_met", if verdict { "true" } else { "false" });
            // also emit the waveform for plotting when an output is requested
            if let Some(out) = &cfg.output {
                let traj =
                    simulator::integrate(&cfg.params, &orbit.initial, 0.0, 2.0 * orbit.period, default_step(&cfg, &b))?;
                let mut csv = String::from("t,x1,x2,v1,v2\n");
                for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
                    if i % cfg.thin != 0 {
                        continue;
                    }
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt17(*t),
                        fmt17(s.x1),
                        fmt17(s.x2),
                        fmt17(s.v1),
                        fmt17(s.v2)
                    ));
                }
                std::fs::write(out.with_extension("csv"), csv)?;
            }
            rep.finish(cfg.output.as_ref())?;
            Ok(verdict)
        }
    }
}
