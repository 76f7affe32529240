use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use ergopt::io::FunctionFile;
use ergopt::lockin::{
    build_perturbation, empirical_radius, lockin_report, walk_suite, LockInReport, PerturbationPlan, PlanOptions,
    RadiusSearch, Sampling, WalkSuite,
};
use ergopt::maxplus::{max_mean_of, oracle_max, MaxMeanResult, NormalFormCertificate, OracleResult};
use ergopt::rational::{fmt_q, parse_q, serde_q, serde_q_vec, Q};
use ergopt::shift::{Alphabet, PeriodicOrbit};
use ergopt::space::{ergodic_average, ASequence, CylinderFunction, NormReport};
use ergopt::verify::{default_instances, run_named, SuiteConfig, SuiteReport, SUITES};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::{document, emit, read_input, write_atomic, write_csv, RunManifest};
use crate::{Globals, LockinArgs, MaximizeArgs, NormArgs, NormalFormArgs, PerturbArgs, SamplingArg, VerifyArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(e)
    }
}

impl From<ergopt::Error> for Failure {
    fn from(e: ergopt::Error) -> Self {
        Failure::Validation(e.into())
    }
}

/// `Ok(true)`: success; `Ok(false)`: a certificate or suite failed.
type Outcome = Result<bool, Failure>;

fn load_function(path: &Path, manifest: &mut RunManifest) -> Result<(CylinderFunction, ASequence), Failure> {
    let text = read_input(path, "function", manifest)?;
    let doc = FunctionFile::parse(&text).with_context(|| format!("{}", path.display()))?;
    let f = doc.function().with_context(|| format!("{}", path.display()))?;
    Ok((f, doc.a_sequence))
}

fn load_plan(path: &Path, manifest: &mut RunManifest) -> Result<PerturbationPlan, Failure> {
    let text = read_input(path, "plan", manifest)?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
    if let Value::Object(m) = &mut v {
        m.remove("manifest");
    }
    let plan: PerturbationPlan = serde_json::from_value(v).with_context(|| format!("{}", path.display()))?;
    plan.check().with_context(|| format!("{} is not a consistent plan", path.display()))?;
    Ok(plan)
}

fn finish(
    mut manifest: RunManifest,
    started: Instant,
    g: &Globals,
    body: &impl Serialize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let elapsed = started.elapsed();
    if g.timing {
        manifest.timing_ms = Some(elapsed.as_millis() as u64);
        eprintln!("elapsed {:.3} s", elapsed.as_secs_f64());
    }
    emit(&document(&manifest, body, g.float)?, out)?;
    Ok(())
}

#[derive(Serialize)]
struct NormDoc<'a> {
    alphabet: Alphabet,
    depth: usize,
    a_sequence: &'a ASequence,
    #[serde(flatten)]
    norm: NormReport,
}

pub fn norm(args: NormArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let mut manifest = RunManifest::new("norm", json!({}));
    let (f, a) = load_function(&args.function, &mut manifest)?;
    let body = NormDoc { alphabet: f.alphabet(), depth: f.depth(), a_sequence: &a, norm: f.norm(&a) };
    finish(manifest, started, g, &body, args.output.as_deref().or(cfg.norm.output.as_deref()))?;
    Ok(true)
}

#[derive(Serialize)]
struct MaximizeDoc {
    #[serde(flatten)]
    result: MaxMeanResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_agrees: Option<bool>,
}

#[derive(Serialize)]
struct CycleRow {
    necklace: String,
    period: usize,
    mean: String,
}

pub fn maximize(args: MaximizeArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let c = &cfg.maximize;
    let period = args.oracle_period.or(c.oracle_period);
    let mut manifest = RunManifest::new("maximize", json!({ "oracle_period": period }));
    let (f, _) = load_function(&args.function, &mut manifest)?;
    let result = max_mean_of(&f)?;
    let oracle = period.map(|p| oracle_max(&f, p)).transpose()?;
    let oracle_agrees = oracle.as_ref().map(|o| o.beta == result.beta);
    if let Some(path) = args.csv.as_ref().or(c.csv.as_ref()) {
        let rows = result
            .critical_cycles
            .iter()
            .map(|o| {
                Ok(CycleRow {
                    necklace: o.necklace().to_string(),
                    period: o.period(),
                    mean: fmt_q(&ergodic_average(&f, o)?),
                })
            })
            .collect::<Result<Vec<_>, ergopt::Error>>()?;
        write_csv(path, &rows)?;
    }
    let body = MaximizeDoc { result, oracle, oracle_agrees };
    finish(manifest, started, g, &body, args.output.as_deref().or(c.output.as_deref()))?;
    Ok(oracle_agrees != Some(false))
}

#[derive(Serialize)]
struct TableDoc {
    depth: usize,
    #[serde(with = "serde_q_vec")]
    table: Vec<Q>,
}

impl From<&CylinderFunction> for TableDoc {
    fn from(f: &CylinderFunction) -> Self {
        TableDoc { depth: f.depth(), table: f.table().to_vec() }
    }
}

#[derive(Serialize)]
struct NormalFormDoc<'a> {
    alphabet: Alphabet,
    a_sequence: &'a ASequence,
    #[serde(with = "serde_q")]
    beta: Q,
    sub_action: TableDoc,
    f_hat: TableDoc,
    optimal_orbits: Vec<PeriodicOrbit>,
    certificate: NormalFormCertificate,
    certified: bool,
}

pub fn normal_form_cmd(args: NormalFormArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let mut manifest = RunManifest::new("normal-form", json!({}));
    let (f, a) = load_function(&args.function, &mut manifest)?;
    let nf = ergopt::maxplus::normal_form(&f, &a)?;
    let support = ergopt::maxplus::maximizing_support(&nf)?;
    let certified = nf.certificate.all_passed();
    let body = NormalFormDoc {
        alphabet: f.alphabet(),
        a_sequence: &a,
        beta: nf.beta.clone(),
        sub_action: (&nf.sub_action.h).into(),
        f_hat: (&nf.f_hat).into(),
        optimal_orbits: support.orbits,
        certificate: nf.certificate,
        certified,
    };
    finish(manifest, started, g, &body, args.output.as_deref().or(cfg.normal_form.output.as_deref()))?;
    Ok(certified)
}

fn plan_summary(plan: &PerturbationPlan) -> String {
    let c = &plan.constants;
    let mode = match plan.mode {
        ergopt::lockin::Mode::Theorem => "theorem",
        ergopt::lockin::Mode::Empirical => "empirical",
    };
    [
        format!("mode        {mode}"),
        format!("certified   {}", plan.certified),
        format!("k           {}", plan.k),
        format!("gamma       {}", fmt_q(&c.gamma)),
        format!("L           {}", fmt_q(&c.l)),
        format!("sigma       {}", fmt_q(&c.sigma)),
        format!("alpha       {}", fmt_q(&c.alpha)),
        format!("radius      {}", fmt_q(&plan.radius)),
        format!("K           {}", plan.truncation_depth),
        format!("recurrence  i={} j={}", plan.recurrence.i, plan.recurrence.j),
        format!("orbit       {} (period {})", plan.orbit.necklace(), plan.period),
    ]
    .join("\n")
        + "\n"
}

pub fn perturb(args: PerturbArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let c = &cfg.perturb;
    let eps_text = args
        .epsilon
        .or_else(|| c.epsilon.clone())
        .ok_or_else(|| Failure::Usage("--epsilon is required".into()))?;
    let eps = parse_q(&eps_text)?;
    let opts = PlanOptions {
        k: args.k.or(c.k),
        truncation_depth: args.truncation_depth.or(c.truncation_depth),
        table_limit: args.table_limit.or(c.table_limit),
    };
    let mut manifest = RunManifest::new(
        "perturb",
        json!({
            "epsilon": fmt_q(&eps),
            "k": opts.k,
            "truncation_depth": opts.truncation_depth,
            "table_limit": opts.table_limit.map(|t| t.to_string()),
        }),
    );
    let (f, a) = load_function(&args.function, &mut manifest)?;
    let plan = build_perturbation(&f, &a, &eps, &opts)?;
    let summary = plan_summary(&plan);
    let out = args.output.as_deref().or(c.output.as_deref());
    finish(manifest, started, g, &plan, out)?;
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(true)
}

#[derive(Serialize)]
struct LockinDoc {
    certified_plan: bool,
    lockin: LockInReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius_search: Option<RadiusSearch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    walks: Option<WalkSuite>,
    passed: bool,
}

#[derive(Serialize)]
struct MarginRow {
    label: String,
    seed: Option<u64>,
    norm_h: String,
    sup_h: String,
    unique: bool,
    margin: String,
    locked: bool,
    iterations: usize,
}

fn sampling_of(arg: Option<SamplingArg>, cfg: Option<&str>) -> Result<Sampling, Failure> {
    match (arg, cfg) {
        (Some(SamplingArg::Multiscale), _) | (None, Some("multiscale")) | (None, None) => Ok(Sampling::Multiscale),
        (Some(SamplingArg::Uniform), _) | (None, Some("uniform")) => Ok(Sampling::Uniform),
        (None, Some(other)) => Err(Failure::Usage(format!("unknown sampling scheme {other:?}"))),
    }
}

pub fn lockin(args: LockinArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let c = &cfg.lockin;
    let trials = args.trials.or(c.trials).unwrap_or(100);
    let seed = args.seed.or(c.seed).unwrap_or(0);
    let sampling = sampling_of(args.sampling, c.sampling.as_deref())?;
    let search = args.empirical_radius || c.empirical_radius.unwrap_or(false);
    let directions = args.directions.or(c.directions).unwrap_or(8);
    let bisections = args.bisections.or(c.bisections).unwrap_or(8);
    let walks = args.walks.or(c.walks).unwrap_or(0);
    let walk_steps = args.walk_steps.or(c.walk_steps).unwrap_or(256);
    if trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let mut manifest = RunManifest::new(
        "lockin",
        json!({
            "trials": trials,
            "sampling": sampling,
            "empirical_radius": search,
            "directions": directions,
            "bisections": bisections,
            "walks": walks,
            "walk_steps": walk_steps,
        }),
    );
    manifest.seed = Some(seed);
    let plan = load_plan(&args.plan, &mut manifest)?;
    let report = lockin_report(&plan, trials, seed, sampling)?;
    eprintln!(
        "lockin: {} trials, all_locked={}, min_margin={}",
        report.results.len(),
        report.all_locked,
        fmt_q(&report.min_margin)
    );
    let radius_search = if search { Some(empirical_radius(&plan, directions, seed, bisections, sampling)?) } else { None };
    if let Some(r) = &radius_search {
        let show = |x: &Option<Q>| x.as_ref().map_or("none".to_string(), fmt_q);
        eprintln!(
            "radius: theorem={} empirical={} ratio={}",
            show(&r.theorem_radius),
            show(&r.empirical_radius),
            show(&r.ratio)
        );
    }
    let walks = if walks > 0 { Some(walk_suite(&plan, walks, walk_steps, seed)?) } else { None };
    let radius_ok = radius_search.as_ref().map_or(true, |r| match (&r.empirical_radius, &r.theorem_radius) {
        (Some(e), Some(t)) => e >= t,
        (Some(_), None) => true,
        (None, _) => false,
    });
    let passed = report.all_locked && radius_ok && walks.as_ref().map_or(true, |w| w.passed);
    if let Some(path) = args.csv.as_ref().or(c.csv.as_ref()) {
        let rows: Vec<MarginRow> = report
            .results
            .iter()
            .map(|t| MarginRow {
                label: t.label.clone(),
                seed: t.seed,
                norm_h: fmt_q(&t.norm_h),
                sup_h: fmt_q(&t.sup_h),
                unique: t.unique,
                margin: fmt_q(&t.margin),
                locked: t.locked,
                iterations: t.iterations,
            })
            .collect();
        write_csv(path, &rows)?;
    }
    let body = LockinDoc { certified_plan: plan.certified, lockin: report, radius_search, walks, passed };
    finish(manifest, started, g, &body, args.output.as_deref().or(c.output.as_deref()))?;
    Ok(passed)
}

#[derive(Serialize)]
struct VerifyDoc {
    suites: Vec<SuiteReport>,
    passed: bool,
}

pub fn verify(args: VerifyArgs, cfg: &Config, g: &Globals) -> Outcome {
    let started = Instant::now();
    let c = &cfg.verify;
    let suite = args.suite.or_else(|| c.suite.clone()).unwrap_or_else(|| "all".into());
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if let Some(&n) = SUITES.iter().find(|&&n| n == suite) {
        vec![n]
    } else {
        return Err(Failure::Usage(format!("unknown suite {suite:?}; expected one of {} or all", SUITES.join(", "))));
    };
    let seed = args.seed.or(c.seed).unwrap_or(0);
    let instances = args.instances.or(c.instances);
    let only = args.only.or(c.only);
    let ranges = c.ranges.clone().unwrap_or_default();
    let dir: PathBuf = args.counterexamples.or_else(|| c.counterexamples.clone()).unwrap_or_else(|| "counterexamples".into());
    let mut manifest = RunManifest::new(
        "verify",
        json!({
            "suite": suite,
            "instances": instances,
            "only": only,
            "ranges": ranges,
            "inject_fault": args.inject_fault,
        }),
    );
    manifest.seed = Some(seed);
    let mut reports = Vec::new();
    for name in names {
        let cfg = SuiteConfig {
            seed,
            instances: instances.unwrap_or_else(|| default_instances(name)),
            only,
            inject_fault: args.inject_fault,
            ranges: ranges.clone(),
        };
        let rep = run_named(name, &cfg)?;
        eprintln!("{}", rep.summary());
        for cx in &rep.failures {
            let path = dir.join(format!("{}-{}-{}-{}.json", cx.suite, cx.seed, cx.index, cx.property));
            let text = serde_json::to_string_pretty(cx).map_err(|e| anyhow!(e))? + "\n";
            write_atomic(&path, text.as_bytes())?;
        }
        if !rep.failures.is_empty() {
            eprintln!("  counterexamples written to {}", dir.display());
        }
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed());
    let body = VerifyDoc { suites: reports, passed };
    finish(manifest, started, g, &body, args.output.as_deref().or(c.output.as_deref()))?;
    Ok(passed)
}
