mod args;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use args::{BuildArgs, Cli, Command, MeasureArgs, TargetArgs};
use relu3d::builders::{build, BuildDoc, BuildInputs, BuildReport};
use relu3d::expansions::target::{catalog_from, Domain, TargetSpec};
use relu3d::net3d::{from_json, to_json};
use relu3d::verify::{
    default_table1_configs, fit_and_check, measure_net, sweep, table1_report, MeasureOpts, NormKind, Table1Config,
};
use relu3d::{Net3D, SizeMetrics};

/// Exit statuses: success, bound failure, usage error.
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

enum Outcome {
    Pass,
    Fail(String),
}

type CliResult = Result<Outcome, String>;

/// Build document next to a net file, written by `build`.
#[derive(Serialize)]
struct ReportOut<'a> {
    doc: &'a BuildDoc,
    report: &'a BuildReport,
}

#[derive(Deserialize)]
struct ReportIn {
    doc: BuildDoc,
    report: StoredBuild,
}

#[derive(Deserialize)]
struct StoredBuild {
    theoretical_bound: f64,
    inputs: BuildInputs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_FAIL)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Build { build: b, out } => cmd_build(&b, &out),
        Command::Eval { net, coords, points, random, lo, hi } => {
            cmd_eval(&net, coords, points.as_deref(), random, (lo, hi), cli.seed)
        }
        Command::Verify { net, target, measure, bound, half_width, report } => {
            cmd_verify(&net, &target, &measure, bound, half_width, report)
        }
        Command::Sweep { build: b, measure, param, values, fit, out } => {
            cmd_sweep(&b, &measure, &param, &values, fit, out.as_deref())
        }
        Command::Size { net } => {
            let m: SizeMetrics = load_net(&net)?.metrics();
            println!("{}", serde_json::to_string_pretty(&m).map_err(|e| e.to_string())?);
            Ok(Outcome::Pass)
        }
        Command::Table1 { config, out } => cmd_table1(config.as_deref(), out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn load_net(path: &Path) -> Result<Net3D, String> {
    from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number {t:?} in domain {s:?}"));
    match parts.as_slice() {
        ["unit"] => Ok(Domain::UnitCube),
        ["sym"] => Ok(Domain::SymmetricCube { half_width: 1.0 }),
        ["sym", a] => Ok(Domain::SymmetricCube { half_width: num(a)? }),
        ["shifted", lo, hi] => Ok(Domain::ShiftedCube { lo: num(lo)?, hi: num(hi)? }),
        ["gauss"] => Ok(Domain::GaussianLine),
        _ => Err(format!("unknown domain {s:?}; use unit, sym[:a], shifted:lo:hi or gauss")),
    }
}

fn default_domain(theorem: &str) -> Domain {
    match theorem {
        "hermite" | "clipped-hermite" => Domain::GaussianLine,
        "trig" | "lp" => Domain::SymmetricCube { half_width: 1.0 },
        _ => Domain::UnitCube,
    }
}

fn parse_target(t: &TargetArgs, dim: usize, theorem: &str) -> Result<Option<TargetSpec>, String> {
    if let Some(path) = &t.target_file {
        let spec: TargetSpec = serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(Some(spec));
    }
    let Some(id) = &t.target else {
        if t.target_params.is_some() || t.domain.is_some() {
            return Err("--target-params and --domain need --target".into());
        }
        return Ok(None);
    };
    let params = match &t.target_params {
        Some(s) => Some(serde_json::from_str(s).map_err(|e| format!("--target-params: {e}"))?),
        None => None,
    };
    let f = catalog_from(id, params).map_err(|e| e.to_string())?;
    let domain = match &t.domain {
        Some(s) => parse_domain(s)?,
        None => default_domain(theorem),
    };
    TargetSpec::catalog(f, dim, domain).map(Some).map_err(|e| e.to_string())
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    match s {
        "sup" | "inf" => Ok(NormKind::Sup),
        "l1" => Ok(NormKind::Lp { p: 1.0 }),
        "l2" => Ok(NormKind::Lp { p: 2.0 }),
        "gauss-l2" => Ok(NormKind::GaussL2),
        _ => match s.strip_prefix("lp:").map(str::parse::<f64>) {
            Some(Ok(p)) if p >= 1.0 => Ok(NormKind::Lp { p }),
            _ => Err(format!("unknown norm {s:?}; use sup, l1, l2, lp:P or gauss-l2")),
        },
    }
}

fn measure_opts(m: &MeasureArgs, target: Option<TargetSpec>) -> Result<MeasureOpts, String> {
    Ok(MeasureOpts {
        norm: m.norm.as_deref().map(parse_norm).transpose()?,
        resolution: m.resolution,
        target,
        bounds: m.domain_lo.zip(m.domain_hi),
    })
}

fn build_doc(b: &BuildArgs) -> Result<BuildDoc, String> {
    let mut doc = match &b.params {
        Some(path) => serde_json::from_str::<BuildDoc>(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let id = b.theorem.clone().ok_or("--theorem or --params is required")?;
            BuildDoc::new(&id, None, Default::default())
        }
    };
    if let Some(id) = &b.theorem {
        doc.theorem_id = id.clone();
    }
    let p = &mut doc.params;
    macro_rules! over {
        ($($field:ident),*) => { $( if b.$field.is_some() { p.$field = b.$field.clone(); } )* };
    }
    over!(coeffs, n, h, delta, rho, beta, r, n1, n2, d, k, p, half_width, width_cap);
    if let Some(kind) = &b.kind {
        p.kind = Some(serde_json::from_value(serde_json::Value::String(kind.clone())).map_err(|_| {
            format!("unknown kind {kind:?}; use cos or sin")
        })?);
    }
    let dim = doc.params.d.or(doc.target.as_ref().map(|t| t.dimension)).unwrap_or(1);
    if let Some(t) = parse_target(&b.target, dim, &doc.theorem_id)? {
        doc.target = Some(t);
    }
    Ok(doc)
}

fn cmd_build(b: &BuildArgs, out: &Path) -> CliResult {
    let doc = build_doc(b)?;
    let report = build(&doc).map_err(|e| e.to_string())?;
    write(out, &to_json(&report.net))?;
    let rep_path = sibling(out, ".report.json");
    let text = serde_json::to_string_pretty(&ReportOut { doc: &doc, report: &report }).map_err(|e| e.to_string())?;
    write(&rep_path, &text)?;
    let m = report.metrics;
    println!(
        "wrote {} (width {}, depth {}, height {}, {} parameters); bound {:e}; report {}",
        out.display(),
        m.width,
        m.depth,
        m.height,
        m.param_count,
        report.theoretical_bound,
        rep_path.display()
    );
    for n in &report.notes {
        println!("note: {n}");
    }
    Ok(Outcome::Pass)
}

fn parse_point(line: &str) -> Result<Vec<f64>, String> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad coordinate {t:?}")))
        .collect()
}

fn cmd_eval(
    net_path: &Path,
    coords: Vec<f64>,
    points: Option<&Path>,
    random: Option<usize>,
    (lo, hi): (f64, f64),
    seed: u64,
) -> CliResult {
    let net = load_net(net_path)?;
    let d = net.input_dim();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    if !coords.is_empty() {
        pts.push(coords);
    }
    if let Some(path) = points {
        for line in read(path)?.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            pts.push(parse_point(line)?);
        }
    }
    if let Some(n) = random {
        if !(lo < hi) {
            return Err("--lo must be below --hi".into());
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        pts.extend((0..n).map(|_| (0..d).map(|_| rng.gen_range(lo..hi)).collect::<Vec<f64>>()));
    }
    if pts.is_empty() {
        return Err("no points given; pass coordinates, --points or --random".into());
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for p in &pts {
        if p.len() != d {
            return Err(format!("point {p:?} has {} coordinates, network takes {d}", p.len()));
        }
        let v = net.evaluate_all(p).map_err(|e| e.to_string())?;
        let vs: Vec<String> = v.iter().map(f64::to_string).collect();
        if random.is_some() || pts.len() > 1 {
            let ps: Vec<String> = p.iter().map(f64::to_string).collect();
            writeln!(w, "{}\t{}", ps.join(","), vs.join(",")).map_err(|e| e.to_string())?;
        } else {
            writeln!(w, "{}", vs.join(",")).map_err(|e| e.to_string())?;
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_verify(
    net_path: &Path,
    t: &TargetArgs,
    m: &MeasureArgs,
    bound: Option<f64>,
    half_width: Option<f64>,
    report: Option<PathBuf>,
) -> CliResult {
    let net = load_net(net_path)?;
    let stored = sibling(net_path, ".report.json");
    let stored: Option<ReportIn> = if stored.exists() {
        Some(serde_json::from_str(&read(&stored)?).map_err(|e| format!("{}: {e}", stored.display()))?)
    } else {
        None
    };
    let (doc, mut inputs, stored_bound) = match stored {
        Some(r) => (r.doc, r.report.inputs, Some(r.report.theoretical_bound)),
        None => (BuildDoc::new("custom", None, Default::default()), BuildInputs::default(), None),
    };
    if half_width.is_some() {
        inputs.half_width = half_width;
    }
    let bound = bound.or(stored_bound).ok_or("no bound given and no build report next to the network")?;
    let target = parse_target(t, net.input_dim(), &doc.theorem_id)?;
    if target.is_none() && doc.target.is_none() && doc.theorem_id == "custom" {
        return Err("--target is required without a build report".into());
    }
    let opts = measure_opts(m, target)?;
    let err = measure_net(&doc, &net, &inputs, bound, &opts).map_err(|e| e.to_string())?;
    let out = report.unwrap_or_else(|| sibling(net_path, ".verify.json"));
    write(&out, &serde_json::to_string_pretty(&err).map_err(|e| e.to_string())?)?;
    let verdict = if err.pass { "pass" } else { "FAIL" };
    println!("{verdict}: measured {:e}, bound {:e} ({})", err.measured, err.bound, err.resolution.method);
    if err.pass {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(format!("bound failure; report written to {}", out.display())))
    }
}

fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    if let Some((a, rest)) = s.split_once("..") {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("bad range bound {t:?} in {s:?}"));
        let (a, b, step) = (int(a)?, int(b)?, int(step)?);
        if step <= 0 || b < a {
            return Err(format!("empty range {s:?}"));
        }
        return Ok((a..=b).step_by(step as usize).map(|v| v as f64).collect());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad value {t:?}"))).collect()
}

fn cmd_sweep(
    b: &BuildArgs,
    m: &MeasureArgs,
    param: &str,
    values: &str,
    fit: Option<f64>,
    out: Option<&Path>,
) -> CliResult {
    let doc = build_doc(b)?;
    let values = parse_values(values)?;
    let table = sweep(&doc, param, &values, &measure_opts(m, None)?).map_err(|e| e.to_string())?;
    let csv = table.to_csv();
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    match fit {
        Some(split) => {
            let f = fit_and_check(&table, split).map_err(|e| e.to_string())?;
            eprintln!("fitted constant {:e} on {} rows, checked {} rows", f.constant, f.fit_rows, f.checked_rows);
            if !f.anomalies.is_empty() {
                eprintln!("warning: error increased at {param} = {:?}", f.anomalies);
            }
            if f.pass {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!("fitted bound fails at {param} = {:?}", f.failures)))
            }
        }
        None => {
            let failed: Vec<f64> =
                table.rows.iter().filter(|r| r.measured > r.bound * (1.0 + relu3d::verify::PASS_SLACK)).map(|r| r.value).collect();
            if failed.is_empty() {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!("bound fails at {param} = {failed:?}")))
            }
        }
    }
}

fn cmd_table1(config: Option<&Path>, out: Option<&Path>) -> CliResult {
    let configs: Vec<Table1Config> = match config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
        None => default_table1_configs().map_err(|e| e.to_string())?,
    };
    let rep = table1_report(&configs).map_err(|e| e.to_string())?;
    let csv = rep.to_csv();
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(Outcome::Pass)
}
