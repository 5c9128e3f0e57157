use std::io::Write;
use std::path::Path;

use serde::Serialize;

use mvspacings::depth::DepthKind;
use mvspacings::numerics::Distribution;
use mvspacings::sim::{median, minimality_study, run_simulation, SimConfig, SimulationReport};
use mvspacings::spacings::depth_order;
use mvspacings::tolerance::{fit_region, GapEstimate, ToleranceKind, ToleranceSpec};

use crate::csvio::{csv_writer, fmt_sig, read_points};
use crate::model::ModelFile;
use crate::{CheckArgs, CliError, FitArgs, HullArgs, MinimalityArgs, SimulateArgs, SpacingsArgs};

/// Digits of the depth column printed by `check`.
const CHECK_DIGITS: usize = 12;

fn spec_from(kind: ToleranceKind, beta: f64, gamma: f64) -> Result<ToleranceSpec, CliError> {
    Ok(match kind {
        ToleranceKind::Content => ToleranceSpec::content(beta, gamma)?,
        ToleranceKind::Expectation => ToleranceSpec::expectation(beta)?,
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn fit<W: Write>(args: &FitArgs, out: &mut W) -> Result<(), CliError> {
    let spec = spec_from(args.kind, args.beta, args.gamma)?;
    let data = read_points(&args.input)?;
    let kind = args.depth.unwrap_or_else(|| DepthKind::default_for_dim(data.dim()));
    let region = fit_region(&data, &spec, kind)?;
    let model = ModelFile::from_region(&region, args.seed, &file_name(&args.input));
    model.save(&args.output)?;
    writeln!(
        out,
        "n={}\np={}\ndepth={}\nkind={}\nr_n={}\nthreshold={}\nretained={}",
        data.len(),
        data.dim(),
        kind.tag(),
        spec.kind.tag(),
        region.plan().r_n,
        region.threshold(),
        region.retained().len()
    )
    .map_err(CliError::io)
}

pub fn check<W: Write>(args: &CheckArgs, out: &mut W) -> Result<(), CliError> {
    let region = ModelFile::load(&args.model)?.to_region()?;
    let queries = read_points(&args.input)?;
    if queries.dim() != region.reference().dim() {
        return Err(CliError::Input(format!(
            "query points have {} columns but the model has dimension {}",
            queries.dim(),
            region.reference().dim()
        )));
    }
    let threshold = region.threshold();
    let depths = region.depth_many(&queries)?;
    let mut w = csv_writer(out, &["row", "depth", "in_region"])?;
    for (i, d) in depths.iter().enumerate() {
        let inside = if *d > threshold { "1" } else { "0" };
        w.write_record([(i + 1).to_string(), fmt_sig(*d, CHECK_DIGITS), inside.to_string()])
            .map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

pub fn spacings<W: Write>(args: &SpacingsArgs, out: &mut W) -> Result<(), CliError> {
    let data = read_points(&args.input)?;
    let kind = args.depth.unwrap_or_else(|| DepthKind::default_for_dim(data.dim()));
    let order = depth_order(&data, kind)?;
    let mut rank = vec![0; data.len()];
    let mut depth = vec![0.0; data.len()];
    for (r, &(i, d)) in order.ranked().iter().enumerate() {
        rank[i] = r + 1;
        depth[i] = d;
    }
    let mut w = csv_writer(out, &["row", "depth", "rank", "spacing"])?;
    for i in 0..data.len() {
        w.write_record([
            (i + 1).to_string(),
            depth[i].to_string(),
            rank[i].to_string(),
            order.spacing_index(depth[i]).to_string(),
        ])
        .map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

pub fn hull<W: Write, E: Write>(args: &HullArgs, out: &mut W, err: &mut E) -> Result<(), CliError> {
    let model = ModelFile::load(&args.model)?;
    if model.dim != 2 {
        return Err(CliError::Unavailable(format!(
            "hulls are only available for bivariate models (this model has p={})",
            model.dim
        )));
    }
    let region = model.to_region()?;
    let hull = region
        .hull()
        .ok_or_else(|| CliError::Input("the model retains no points, so it has no hull".into()))?;
    if hull.is_degenerate() {
        writeln!(
            err,
            "warning: the retained points are collinear; emitting a degenerate hull with {} vertices",
            hull.vertices().len()
        )
        .map_err(CliError::io)?;
    }
    let mut w = csv_writer(out, &["x", "y"])?;
    for v in hull.vertices() {
        w.write_record([v[0].to_string(), v[1].to_string()]).map_err(CliError::io)?;
    }
    w.flush().map_err(CliError::io)
}

/// The configuration `simulate` would run, with the size defaults applied.
pub fn simulation_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let (n, m, big_m) = if args.full_scale { (300, 100, 1000) } else { (100, 20, 200) };
    let spec = spec_from(args.kind, args.beta, args.gamma)?;
    Ok(SimConfig::new(
        args.dist.clone(),
        args.depth,
        args.n.unwrap_or(n),
        args.m.unwrap_or(m),
        args.big_m.unwrap_or(big_m),
        spec,
        args.seed,
    )?)
}

pub fn simulation_report(args: &SimulateArgs) -> Result<SimulationReport, CliError> {
    Ok(run_simulation(&simulation_config(args)?)?)
}

#[derive(Serialize)]
struct SimulationJson<'a> {
    dist: &'a str,
    depth: &'a str,
    n: usize,
    m: usize,
    #[serde(rename = "M")]
    big_m: usize,
    kind: &'a str,
    beta: f64,
    gamma: Option<f64>,
    seed: u64,
    r_n: usize,
    estimate: f64,
    std_error: f64,
    beta_bars: &'a [f64],
}

fn report_lines(report: &SimulationReport) -> String {
    let c = &report.config;
    let mut s = format!(
        "dist={}\ndepth={}\nn={}\nm={}\nM={}\nkind={}\nbeta={}\n",
        c.dist.tag(),
        c.kind.tag(),
        c.n,
        c.m,
        c.big_m,
        c.spec.kind.tag(),
        c.spec.beta
    );
    if let Some(g) = c.spec.gamma {
        s += &format!("gamma={g}\n");
    }
    let name = match c.spec.kind {
        ToleranceKind::Content => "gamma_hat",
        ToleranceKind::Expectation => "beta_hat",
    };
    s += &format!(
        "seed={}\nr_n={}\n{name}={}\nse={}\n",
        c.seed, report.r_n, report.estimate, report.std_error
    );
    s
}

pub fn simulate<W: Write, E: Write>(args: &SimulateArgs, out: &mut W, err: &mut E) -> Result<(), CliError> {
    let report = simulation_report(args)?;
    out.write_all(report_lines(&report).as_bytes()).map_err(CliError::io)?;
    writeln!(err, "elapsed_s={:.3}", report.elapsed.as_secs_f64()).map_err(CliError::io)?;
    if let Some(path) = &args.json {
        let c = &report.config;
        let json = SimulationJson {
            dist: c.dist.tag(),
            depth: c.kind.tag(),
            n: c.n,
            m: c.m,
            big_m: c.big_m,
            kind: c.spec.kind.tag(),
            beta: c.spec.beta,
            gamma: c.spec.gamma,
            seed: c.seed,
            r_n: report.r_n,
            estimate: report.estimate,
            std_error: report.std_error,
            beta_bars: &report.beta_bars,
        };
        let text = serde_json::to_string_pretty(&json).map_err(CliError::io)? + "\n";
        std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Per-replication gaps and their medians.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalitySummary {
    pub gaps: Vec<GapEstimate>,
    pub median_area: f64,
    pub median_ratio: f64,
}

pub fn minimality_gaps(args: &MinimalityArgs) -> Result<MinimalitySummary, CliError> {
    if !matches!(args.dist, Distribution::StdNormal) {
        return Err(CliError::Infeasible(format!(
            "minimality needs the bivariate normal population region; '{}' is not supported",
            args.dist.tag()
        )));
    }
    let gaps = minimality_study(&args.dist, args.n, args.beta, args.reps, args.probes, args.seed)?;
    let areas: Vec<f64> = gaps.iter().map(|g| g.gap).collect();
    let ratios: Vec<f64> = gaps.iter().map(GapEstimate::ratio).collect();
    Ok(MinimalitySummary {
        median_area: median(&areas),
        median_ratio: median(&ratios),
        gaps,
    })
}

pub fn minimality<W: Write>(args: &MinimalityArgs, out: &mut W) -> Result<(), CliError> {
    let summary = minimality_gaps(args)?;
    for (i, g) in summary.gaps.iter().enumerate() {
        writeln!(out, "rep={} area={} ratio={}", i + 1, g.gap, g.ratio()).map_err(CliError::io)?;
    }
    writeln!(
        out,
        "median_area={}\nmedian_ratio={}",
        summary.median_area, summary.median_ratio
    )
    .map_err(CliError::io)
}
