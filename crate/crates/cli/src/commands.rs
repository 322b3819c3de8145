use std::time::{Duration, Instant};

use ddtruss::kernel::loo_error;
use ddtruss::{
    cross_validate_alpha, default_alpha_grid, load_dataset, newton_solve, synth_dataset, trace_path, ChebyshevLaw,
    ChebyshevSurrogate, Constitutive, DVector, EquilibriumPath, KernelSurrogate, MaterialDataset, MaterialLaw,
    PathFailure, SolveResult, SynthSpec, TrussModel,
};

use crate::args::{parse_range, Format, LawArgs, Method, OutputArgs, SolverArgs, SurrogateArgs, TrussArgs};
use crate::error::CliError;
use crate::report::{fmt_num, summary, Cell, Report, Table};

pub fn emit(report: &Report, out: &OutputArgs) -> Result<(), CliError> {
    let text = match out.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_id(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

pub fn synth(
    law_args: &LawArgs,
    count: usize,
    range: &str,
    noise: f64,
    jitter: f64,
    seed: u64,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let law = MaterialLaw::from_id(&law_args.law, &law_args.params())?;
    let strain_range = parse_range(range).map_err(CliError::Usage)?;
    let mut spec = SynthSpec::new(law, count, strain_range, noise, seed);
    spec.jitter = jitter;
    let data = synth_dataset(&spec)?;

    let mut report = Report::new("synth");
    report.config("law", law.id());
    match law {
        MaterialLaw::Linear { modulus } => report.config_num("E", modulus),
        MaterialLaw::Hyperbolic { modulus, ref_strain } => {
            report.config_num("E", modulus);
            report.config_num("ref_strain", ref_strain);
        }
        MaterialLaw::RambergOsgood {
            modulus,
            yield_stress,
            alpha,
            exponent,
        } => {
            report.config_num("E", modulus);
            report.config_num("yield_stress", yield_stress);
            report.config_num("ro_alpha", alpha);
            report.config_num("exponent", exponent);
        }
    }
    report.config("n", count);
    report.config(
        "range",
        format!("{}:{}", fmt_num(strain_range.0), fmt_num(strain_range.1)),
    );
    report.config_num("noise", noise);
    report.config_num("jitter", jitter);
    report.config("seed", seed);
    report.config("format", format_id(out.format));
    let mut t = Table::new("points", &["strain", "stress"]);
    for p in data.points() {
        t.push(vec![p.strain.into(), p.stress.into()]);
    }
    report.tables.push(t);
    emit(&report, out)
}

enum Fitted {
    Chebyshev(ChebyshevLaw),
    Kernel(KernelSurrogate),
}

impl Fitted {
    fn law(&self) -> &dyn Constitutive {
        match self {
            Fitted::Chebyshev(c) => c,
            Fitted::Kernel(k) => k,
        }
    }
}

fn load(args: &SurrogateArgs, report: &mut Report) -> Result<MaterialDataset, CliError> {
    report.config("dataset", args.dataset.display());
    Ok(load_dataset(&args.dataset)?)
}

fn chebyshev_count(args: &SurrogateArgs, data: &MaterialDataset) -> usize {
    args.count.unwrap_or_else(|| ChebyshevSurrogate::default_count(data))
}

fn fit_chebyshev(data: &MaterialDataset, count: usize) -> Result<ChebyshevLaw, CliError> {
    Ok(ChebyshevLaw::new(ChebyshevSurrogate::fit_from_data(data, count)?))
}

fn fit_kernel(args: &SurrogateArgs, data: &MaterialDataset) -> Result<KernelSurrogate, CliError> {
    let alpha = match args.alpha {
        Some(a) => a,
        None => cross_validate_alpha(data, &default_alpha_grid(data, args.grid_size))?,
    };
    Ok(KernelSurrogate::new(data, alpha)?)
}

fn describe(args: &SurrogateArgs, method: Method, data: &MaterialDataset, report: &mut Report) {
    match method {
        Method::Chebyshev => report.config("N", chebyshev_count(args, data)),
        Method::Kernel => match args.alpha {
            Some(a) => report.config_num("alpha", a),
            None => report.config("grid_size", args.grid_size),
        },
    }
}

fn fit_method(args: &SurrogateArgs, method: Method, data: &MaterialDataset) -> Result<Fitted, CliError> {
    Ok(match method {
        Method::Chebyshev => Fitted::Chebyshev(fit_chebyshev(data, chebyshev_count(args, data))?),
        Method::Kernel => Fitted::Kernel(fit_kernel(args, data)?),
    })
}

fn surrogate_summary(fitted: &Fitted) -> Vec<(&'static str, Cell)> {
    match fitted {
        Fitted::Chebyshev(c) => {
            let (a, b) = c.curve().domain();
            vec![
                ("method", "chebyshev".into()),
                ("n_retained", c.curve().len().into()),
                ("domain_lo", a.into()),
                ("domain_hi", b.into()),
            ]
        }
        Fitted::Kernel(k) => vec![("method", "kernel".into()), ("alpha", k.alpha().into())],
    }
}

pub fn fit(args: &SurrogateArgs, dense: Option<usize>, out: &OutputArgs) -> Result<(), CliError> {
    let mut report = Report::new("fit");
    let data = load(args, &mut report)?;
    report.config("method", args.method.id());
    describe(args, args.method, &data, &mut report);
    if let Some(m) = dense {
        report.config("dense", m);
    }
    report.config("format", format_id(out.format));

    let fitted = fit_method(args, args.method, &data)?;
    let law = fitted.law();
    let mut worst = 0.0f64;
    for p in data.points() {
        let s = law.stress(p.strain).map_err(|e| CliError::Coverage(e.to_string()))?;
        worst = worst.max((s - p.stress).abs());
    }
    let mut pairs = vec![("points", data.len().into())];
    pairs.extend(surrogate_summary(&fitted));
    pairs.push(("max_abs_data_residual", worst.into()));
    report.tables.push(summary(pairs));

    match &fitted {
        Fitted::Chebyshev(c) => {
            let mut t = Table::new("coefficients", &["k", "coefficient"]);
            for (k, v) in c.curve().coeffs().iter().enumerate() {
                t.push(vec![k.into(), (*v).into()]);
            }
            report.tables.push(t);
        }
        Fitted::Kernel(k) if args.alpha.is_none() => {
            let mut t = Table::new("cross_validation", &["alpha", "loo_error", "chosen"]);
            for a in default_alpha_grid(&data, args.grid_size) {
                t.push(vec![a.into(), loo_error(&data, a).into(), (a == k.alpha()).into()]);
            }
            report.tables.push(t);
        }
        Fitted::Kernel(_) => {}
    }

    if let Some(m) = dense {
        if m < 2 {
            return Err(CliError::Usage("--dense needs at least 2 points".into()));
        }
        let (lo, hi) = (data.strain_min(), data.strain_max());
        let mut t = Table::new("curve", &["strain", "stress", "tangent"]);
        for i in 0..m {
            let e = lo + (hi - lo) * i as f64 / (m - 1) as f64;
            let s = law.stress(e).map_err(|e| CliError::Coverage(e.to_string()))?;
            let ds = law.tangent_modulus(e).map_err(|e| CliError::Coverage(e.to_string()))?;
            t.push(vec![e.into(), s.into(), ds.into()]);
        }
        report.tables.push(t);
    }
    emit(&report, out)
}

fn coverage_message(lambda: f64, result: &SolveResult) -> CliError {
    match &result.last_domain_exit {
        Some(d) => CliError::Coverage(format!(
            "no equilibrium within data coverage at lambda = {lambda}: member {} needs strain {:e} outside [{:e}, {:e}]",
            d.member, d.strain, d.lo, d.hi
        )),
        None => CliError::NotConverged(format!(
            "solver did not converge at lambda = {lambda} ({:?} after {} iterations, residual {:e})",
            result.termination, result.iterations, result.residual_norm
        )),
    }
}

fn path_error(f: &PathFailure) -> CliError {
    let msg = format!("path stopped at lambda = {}: {}", f.lambda, f.reason);
    if f.domain_exit.is_some() {
        CliError::Coverage(msg)
    } else {
        CliError::NotConverged(msg)
    }
}

pub fn solve(
    s_args: &SurrogateArgs,
    t_args: &TrussArgs,
    solver: &SolverArgs,
    lambda: f64,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let mut report = Report::new("solve");
    let data = load(s_args, &mut report)?;
    report.config("method", s_args.method.id());
    describe(s_args, s_args.method, &data, &mut report);
    let model = t_args.build(&mut report)?;
    report.config_num("lambda", lambda);
    let settings = solver.settings(&mut report)?;
    report.config("format", format_id(out.format));

    let fitted = fit_method(s_args, s_args.method, &data)?;
    let law = fitted.law();
    let result = newton_solve(&model, law, lambda, &rest(&model), &settings)?;
    if !result.converged {
        return Err(coverage_message(lambda, &result));
    }

    let k = model.tangent(law, &result.u)?;
    let quad = 0.5 * result.u.dot(&(&k * &result.u));
    let mut pairs = surrogate_summary(&fitted);
    pairs.extend([
        ("lambda", lambda.into()),
        ("converged", result.converged.into()),
        ("iterations", result.iterations.into()),
        ("residual_norm", result.residual_norm.into()),
        ("threshold", settings.threshold(&model, law, lambda).into()),
        ("energy_J", result.energy.into()),
        ("half_uKu_J", quad.into()),
        ("energy_anchor_strain", law.energy_anchor().into()),
    ]);
    report.tables.push(summary(pairs));

    let mut nodes = Table::new("nodes", &["node", "ux", "uy"]);
    for (n, (ux, uy)) in model.nodes().iter().zip(model.node_displacements(&result.u)) {
        nodes.push(vec![n.id.clone().into(), ux.into(), uy.into()]);
    }
    report.tables.push(nodes);
    let mut members = Table::new("members", &["member", "strain", "stress", "force"]);
    for ((m, e), s) in model.members().iter().zip(&result.strains).zip(&result.stresses) {
        members.push(vec![m.id.clone().into(), (*e).into(), (*s).into(), (s * m.area).into()]);
    }
    report.tables.push(members);
    if law.energy_anchor() != 0.0 {
        report.trailer.push((
            "note".into(),
            "data does not reach zero strain; energy is measured from energy_anchor_strain".into(),
        ));
    }
    emit(&report, out)
}

fn rest(model: &TrussModel) -> DVector<f64> {
    DVector::zeros(model.n_free())
}

/// `(label, free dof)` for the reported displacement column.
fn select_dof(model: &TrussModel, spec: Option<&str>) -> Result<(String, usize), CliError> {
    let locate = |node: usize, axis: usize| model.nodes()[node].dofs[axis];
    match spec {
        Some(text) => {
            let (id, axis) = text
                .rsplit_once(':')
                .ok_or_else(|| CliError::Usage(format!("--dof expects NODE:x or NODE:y, got `{text}`")))?;
            let axis_idx = match axis {
                "x" => 0,
                "y" => 1,
                _ => return Err(CliError::Usage(format!("--dof axis must be x or y, got `{axis}`"))),
            };
            let node = model
                .node_index(id)
                .ok_or_else(|| CliError::Usage(format!("--dof names unknown node `{id}`")))?;
            let dof = locate(node, axis_idx).ok_or_else(|| CliError::Usage(format!("--dof {text} is a support")))?;
            Ok((text.to_string(), dof))
        }
        None => {
            // largest reference load component, first on ties
            let p = model.p_ref();
            let mut best = 0;
            for k in 0..p.len() {
                if p[k].abs() > p[best].abs() {
                    best = k;
                }
            }
            for n in model.nodes() {
                for (axis, name) in ["x", "y"].iter().enumerate() {
                    if n.dofs[axis] == Some(best) {
                        return Ok((format!("{}:{name}", n.id), best));
                    }
                }
            }
            unreachable!("every free dof belongs to a node")
        }
    }
}

fn path_table(path: &EquilibriumPath, dof: usize) -> Table {
    let mut t = Table::new(
        "path",
        &["lambda", "u_norm", "u_dof", "energy_J", "iterations", "residual_norm"],
    );
    for step in &path.steps {
        let r = &step.result;
        t.push(vec![
            step.lambda.into(),
            r.u.norm().into(),
            r.u[dof].into(),
            r.energy.into(),
            r.iterations.into(),
            r.residual_norm.into(),
        ]);
    }
    t
}

pub struct PathOptions<'a> {
    pub lambdas: &'a [f64],
    pub lambda_spec: &'a str,
    pub dof: Option<&'a str>,
}

pub fn path(
    s_args: &SurrogateArgs,
    t_args: &TrussArgs,
    solver: &SolverArgs,
    opts: &PathOptions,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let mut report = Report::new("path");
    let data = load(s_args, &mut report)?;
    report.config("method", s_args.method.id());
    describe(s_args, s_args.method, &data, &mut report);
    let model = t_args.build(&mut report)?;
    report.config("lambda", opts.lambda_spec);
    let (dof_label, dof) = select_dof(&model, opts.dof)?;
    report.config("dof", &dof_label);
    let settings = solver.settings(&mut report)?;
    report.config("format", format_id(out.format));

    let fitted = fit_method(s_args, s_args.method, &data)?;
    let result = trace_path(&model, fitted.law(), opts.lambdas, &settings)?;
    report.tables.push(path_table(&result, dof));
    if let Some(f) = &result.failure {
        report.trailer.push(("truncated_at_lambda".into(), f.lambda.into()));
        report.trailer.push(("reason".into(), f.reason.clone().into()));
    }
    emit(&report, out)?;
    match &result.failure {
        Some(f) => Err(path_error(f)),
        None => Ok(()),
    }
}

fn median(mut xs: Vec<Duration>) -> f64 {
    xs.sort();
    xs[xs.len() / 2].as_secs_f64()
}

struct Timed {
    fit: Vec<Duration>,
    solve: Vec<Duration>,
    total: Vec<Duration>,
}

impl Timed {
    fn new() -> Self {
        Self {
            fit: Vec::new(),
            solve: Vec::new(),
            total: Vec::new(),
        }
    }

    fn record(&mut self, fit: Duration, solve: Duration) {
        self.fit.push(fit);
        self.solve.push(solve);
        self.total.push(fit + solve);
    }
}

pub fn compare(
    s_args: &SurrogateArgs,
    t_args: &TrussArgs,
    solver: &SolverArgs,
    opts: &PathOptions,
    repeat: usize,
    out: &OutputArgs,
) -> Result<(), CliError> {
    if repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    let mut report = Report::new("compare");
    let data = load(s_args, &mut report)?;
    describe(s_args, Method::Chebyshev, &data, &mut report);
    describe(s_args, Method::Kernel, &data, &mut report);
    let model = t_args.build(&mut report)?;
    report.config("lambda", opts.lambda_spec);
    let settings = solver.settings(&mut report)?;
    report.config("repeat", repeat);
    report.config("format", format_id(out.format));

    let count = chebyshev_count(s_args, &data);
    let (mut cheb_t, mut kern_t) = (Timed::new(), Timed::new());
    let mut last = None;
    for _ in 0..repeat {
        let t0 = Instant::now();
        let cheb = fit_chebyshev(&data, count)?;
        let t1 = Instant::now();
        let cheb_path = trace_path(&model, &cheb, opts.lambdas, &settings)?;
        let t2 = Instant::now();
        cheb_t.record(t1 - t0, t2 - t1);

        let t0 = Instant::now();
        let kern = fit_kernel(s_args, &data)?;
        let t1 = Instant::now();
        let kern_path = trace_path(&model, &kern, opts.lambdas, &settings)?;
        let t2 = Instant::now();
        kern_t.record(t1 - t0, t2 - t1);
        last = Some((cheb, cheb_path, kern, kern_path));
    }
    let (cheb, cheb_path, kern, kern_path) = last.expect("repeat >= 1");

    let mut table = Table::new(
        "discrepancy",
        &[
            "lambda",
            "u_norm_chebyshev",
            "u_norm_kernel",
            "rel_discrepancy",
            "energy_chebyshev_J",
            "energy_kernel_J",
        ],
    );
    let mut worst = 0.0f64;
    for (c, k) in cheb_path.steps.iter().zip(&kern_path.steps) {
        let scale = c.result.u.amax();
        let gap = if scale > 0.0 {
            (&c.result.u - &k.result.u).amax() / scale
        } else {
            k.result.u.amax()
        };
        worst = worst.max(gap);
        table.push(vec![
            c.lambda.into(),
            c.result.u.norm().into(),
            k.result.u.norm().into(),
            gap.into(),
            c.result.energy.into(),
            k.result.energy.into(),
        ]);
    }
    let alpha_source = if s_args.alpha.is_some() {
        "fixed"
    } else {
        "cross-validation"
    };
    report.tables.push(summary(vec![
        ("points", data.len().into()),
        ("chebyshev_n_retained", cheb.curve().len().into()),
        ("kernel_alpha", kern.alpha().into()),
        ("kernel_alpha_source", alpha_source.into()),
        ("steps_chebyshev", cheb_path.steps.len().into()),
        ("steps_kernel", kern_path.steps.len().into()),
        ("max_rel_discrepancy", worst.into()),
    ]));
    report.tables.push(table);
    for (name, p) in [("chebyshev", &cheb_path), ("kernel", &kern_path)] {
        if let Some(f) = &p.failure {
            report
                .trailer
                .push((format!("{name}_truncated_at_lambda"), f.lambda.into()));
            report.trailer.push((format!("{name}_reason"), f.reason.clone().into()));
        }
    }

    let mut timings = Table::new("timings", &["method", "phase", "median_s", "repeats"]);
    let fit_phase = if s_args.alpha.is_some() { "fit" } else { "cv" };
    for (method, fit_name, t) in [("chebyshev", "fit", &cheb_t), ("kernel", fit_phase, &kern_t)] {
        for (phase, runs) in [(fit_name, &t.fit), ("solve", &t.solve), ("total", &t.total)] {
            timings.push(vec![
                method.into(),
                phase.into(),
                median(runs.clone()).into(),
                repeat.into(),
            ]);
        }
    }
    report.timings = Some(timings);
    emit(&report, out)?;

    match (&cheb_path.failure, &kern_path.failure) {
        (Some(f), _) | (None, Some(f)) => Err(path_error(f)),
        (None, None) => Ok(()),
    }
}
