use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use quasilab::algebra::{Algebra, QValue};
use quasilab::dynamics::{
    block_counting_bound, bmo_stat, brs_empirical, discrepancy_trace, dyadic_lengths, BmoStat, DiscrepancyTrace,
};
use quasilab::lattice::make_special_lattice;
use quasilab::modelset::{
    cut_and_project, density_estimate, dual_model_points, periodic_dual, periodic_points, separation, PointSet,
    SearchBox,
};
use quasilab::regions::{
    brs_parallelepiped, construct_brs_between, realize_measure, verify_equidecomposition, ConstructParams,
    EquidecompCertificate, RegionError, RegionSet,
};
use quasilab::riesz::{
    avdonin_check, delta_and_means, delta_sequence, displacement_bound, duality_experiment, enumerate_blocks,
    extreme_eigs, gram_matrix, riesz_bound_trace, BoundTrace, DualityParams, GramReport, EIG_TOLERANCE, TIE_BREAK,
};

use crate::args::{Cli, Command, Common};
use crate::config::ExperimentConfig;
use crate::plot::{emit_plotdata, PlotData, PlotKind};
use crate::{
    load_algebra, load_points, load_region, parse_list, parse_value, parse_values, parse_window, read_file, resolve,
    write_file, CliError, CliResult,
};

pub const REPORT_VERSION: &str = "quasilab-report/1";
pub const DUALITY_VERSION: &str = "quasilab-duality/1";

pub(crate) fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen { alpha, beta, window, range, common } => gen(&alpha, &beta, &window, range, &common),
        Command::Dual { alpha, beta, set, range, common } => dual(&alpha, &beta, &set, range, &common),
        Command::Periodic { alpha, window, set, range, common } => {
            periodic(&alpha, window.as_deref(), set.as_deref(), range, &common)
        }
        Command::Disc { set, alpha, n, x0, two_sided, bmo_max, plot_dir, common } => {
            disc(&set, &alpha, n, x0.as_deref(), two_sided, bmo_max, plot_dir.as_deref(), &common)
        }
        Command::BrsTest { set, alpha, n, j, cert, common } => {
            brs_test(set.as_deref(), alpha.as_deref(), n, j, cert.as_deref(), &common)
        }
        Command::BrsMake { alpha, gamma, edges, bound, inner, outer, epsilon, max_n, refinements, common } => {
            let params = ConstructParams { epsilon, max_n, refinements };
            brs_make(&alpha, gamma.as_deref(), &edges, bound, inner.as_deref().zip(outer.as_deref()), &params, &common)
        }
        Command::Enum { alpha, beta, set, range, s0, common } => enumerate(&alpha, &beta, &set, range, s0, &common),
        Command::Avdonin { alpha, beta, set, length, n_max, k_max, common } => {
            avdonin(&alpha, &beta, &set, length.as_deref(), n_max, k_max, &common)
        }
        Command::Gram { points, set, matrix, common } => gram(&points, &set, matrix.as_deref(), &common),
        Command::Bounds { points, set, radii, plot_dir, common } => {
            bounds(&points, &set, &radii, plot_dir.as_deref(), &common)
        }
        Command::Duality { config, out } => duality(&config, out.as_deref()),
        Command::Report { config, out_dir } => report(&config, out_dir.as_deref()),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

/// Main artifact to `--out` (summary on stdout) or to stdout (summary on stderr).
fn emit(common: &Common, artifact: &str, summary: Value) -> CliResult<()> {
    match &common.out {
        Some(path) => {
            write_file(path, artifact)?;
            print!("{}", to_json(&summary));
        }
        None => {
            print!("{artifact}");
            eprint!("{}", to_json(&summary));
        }
    }
    Ok(())
}

/// JSON is the artifact itself.
fn emit_json<T: Serialize>(common: &Common, v: &T) -> CliResult<()> {
    let text = to_json(v);
    match &common.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn points_summary(p: &PointSet) -> Value {
    json!({ "points": p.len(), "range": p.range(), "separation": separation(p) })
}

fn gen_points(alg: &Algebra, alpha: &str, beta: &str, window: &RegionSet, range: i64) -> CliResult<PointSet> {
    let (alpha, beta) = (parse_values(alg, alpha)?, parse_values(alg, beta)?);
    let special = make_special_lattice(&alpha, &beta)?;
    Ok(cut_and_project(&special.gamma, window, &SearchBox::symmetric(alpha.len(), range))?)
}

fn gen(alpha: &str, beta: &str, window: &str, range: i64, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let window = parse_window(&alg, window)?;
    let p = gen_points(&alg, alpha, beta, &window, range)?;
    emit(common, &p.to_csv(), points_summary(&p))
}

fn dual(alpha: &str, beta: &str, set: &str, range: i64, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let p = dual_model_points(&parse_values(&alg, alpha)?, &parse_values(&alg, beta)?, &s, (-range, range))?;
    emit(common, &p.to_csv(), points_summary(&p))
}

fn periodic(alpha: &str, window: Option<&str>, set: Option<&str>, range: i64, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let alpha = parse_values(&alg, alpha)?;
    let p = match (window, set) {
        (Some(w), _) => periodic_points(&alpha, &parse_window(&alg, w)?, &vec![(-range, range); alpha.len()])?,
        (None, Some(s)) => periodic_dual(&alpha, &load_region(&alg, s)?, (-range, range))?,
        (None, None) => return Err(CliError::Usage("periodic needs --window or --set".into())),
    };
    emit(common, &p.to_csv(), points_summary(&p))
}

fn bmo_summary(trace: &DiscrepancyTrace, bmo_max: usize) -> CliResult<BmoStat> {
    Ok(bmo_stat(&trace.values, &dyadic_lengths(bmo_max))?)
}

fn trace_plot(trace: &DiscrepancyTrace) -> PlotData {
    let dn = (trace.n_start..).zip(trace.values.iter().copied()).collect();
    PlotData { discrepancy: dn, ..PlotData::default() }
}

#[allow(clippy::too_many_arguments)]
fn disc(
    set: &str,
    alpha: &str,
    n: i64,
    x0: Option<&str>,
    two_sided: bool,
    bmo_max: Option<usize>,
    plot_dir: Option<&Path>,
    common: &Common,
) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let alpha = parse_values(&alg, alpha)?;
    let x0 = match x0 {
        Some(t) => parse_values(&alg, t)?,
        None => vec![QValue::zero(&alg); alpha.len()],
    };
    let range = if two_sided { (-n, n) } else { (0, n) };
    let trace = discrepancy_trace(&s, &alpha, &x0, range, two_sided)?;
    let bmo = bmo_max.map(|m| bmo_summary(&trace, m)).transpose()?;
    if let Some(dir) = plot_dir {
        emit_plotdata(&trace_plot(&trace), PlotKind::Discrepancy, dir)?;
    }
    let summary = json!({
        "region": trace.region,
        "mes": trace.mes,
        "n_range": [range.0, range.1],
        "max_abs": trace.max_abs,
        "argmax_n": trace.argmax_n,
        "bmo": bmo,
    });
    emit(common, &trace.to_csv(), summary)
}

fn load_certificate(path: &Path, alg: &Algebra) -> CliResult<EquidecompCertificate> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = read_file(path)?;
    let loader = |p: &str, alg: &Algebra| {
        let full = resolve(&base, Path::new(p));
        let text = std::fs::read_to_string(&full)
            .map_err(|e| RegionError::Parse { line: 0, msg: format!("cannot read {}: {e}", full.display()) })?;
        RegionSet::parse(&text, alg)
    };
    EquidecompCertificate::parse(&text, alg, loader).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn brs_test(
    set: Option<&str>,
    alpha: Option<&str>,
    n: i64,
    j: i64,
    cert: Option<&Path>,
    common: &Common,
) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let statistic = match (set, alpha) {
        (Some(s), Some(a)) => Some(brs_empirical(&load_region(&alg, s)?, &parse_values(&alg, a)?, n, j)?),
        _ => None,
    };
    let certificate = cert.map(|p| load_certificate(p, &alg)).transpose()?.map(|c| verify_equidecomposition(&c));
    emit_json(common, &json!({ "statistic": statistic, "certificate": certificate }))
}

fn parse_edge(text: &str) -> CliResult<(i64, Vec<i64>)> {
    let bad = || CliError::Precondition(format!("edge `{text}` is not of the form n:m1,m2,.."));
    let (n, m) = text.split_once(':').ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, parse_list(m, "edge coefficient")?))
}

fn brs_make(
    alpha: &str,
    gamma: Option<&str>,
    edges: &[String],
    bound: i64,
    between: Option<(&str, &str)>,
    params: &ConstructParams,
    common: &Common,
) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let alpha = parse_values(&alg, alpha)?;
    let gamma = gamma.map(|g| parse_value(&alg, g)).transpose()?;
    let (region, summary) = match (edges.is_empty(), gamma, between) {
        (false, None, None) => {
            let gens = edges.iter().map(|e| parse_edge(e)).collect::<CliResult<Vec<_>>>()?;
            let b = brs_parallelepiped(&alpha, &gens)?;
            let summary = json!({ "witnesses": b.witnesses, "volume": b.region.volume()?.to_string() });
            (b.region, summary)
        }
        (true, Some(g), Some((inner, outer))) => {
            let (k, u) = (load_region(&alg, inner)?, load_region(&alg, outer)?);
            let c = construct_brs_between(&k, &u, &g, &alpha, params)?;
            let summary = json!({
                "volume": c.region.volume()?.to_string(),
                "pieces": c.region.pieces().len(),
                "witnesses": c.edge_witnesses,
                "tiles_meeting_k": c.tiles_meeting_k,
                "free_tiles": c.free_tiles,
                "residual": c.residual,
                "epsilon": c.epsilon,
            });
            (c.region, summary)
        }
        (true, Some(g), None) => {
            let b = realize_measure(&alpha, &g, bound)?;
            let summary = json!({ "witnesses": b.witnesses, "volume": b.region.volume()?.to_string(), "bound": bound });
            (b.region, summary)
        }
        _ => {
            return Err(CliError::Usage(
                "brs-make takes either --edge (repeated), --gamma, or --gamma with --inner and --outer".into(),
            ))
        }
    };
    emit(common, &region.to_text(), summary)
}

/// `n` range of `Λ*` that covers `j` indices up to `extra` on both sides.
fn dual_range_for(beta: &[QValue], s: &RegionSet, extra: f64) -> CliResult<i64> {
    let mes = s.volume()?.to_f64();
    let beta_num: Vec<f64> = beta.iter().map(QValue::to_f64).collect();
    Ok((extra / mes + s.max_abs_dot(&beta_num)).ceil() as i64 + 2)
}

fn enumerate(alpha: &str, beta: &str, set: &str, range: i64, s0: i64, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let p = dual_model_points(&parse_values(&alg, alpha)?, &parse_values(&alg, beta)?, &s, (-range, range))?;
    let e = enumerate_blocks(&p, s0)?;
    let mes = s.volume()?;
    let d = delta_sequence(&e, &mes)?;
    let mut csv = String::from("j,lambda,block,rank,delta\n");
    for i in 0..e.len() {
        let j = e.j_start + i as i64;
        let _ = writeln!(csv, "{j},{:.16e},{},{},{:.16e}", e.lambda[i], e.block[i], e.rank[i], d.delta[i]);
    }
    let summary = json!({
        "points": e.len(),
        "j_range": [e.j_start, e.j_end()],
        "tie_break": TIE_BREAK,
        "sup_delta": d.sup_abs(),
        "displacement": displacement_bound(&e, mes.to_f64()),
    });
    emit(common, &csv, summary)
}

fn avdonin(
    alpha: &str,
    beta: &str,
    set: &str,
    length: Option<&str>,
    n_max: usize,
    k_max: i64,
    common: &Common,
) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let (alpha, beta) = (parse_values(&alg, alpha)?, parse_values(&alg, beta)?);
    let mes = s.volume()?;
    let len = match length {
        Some(t) => parse_value(&alg, t)?,
        None => mes.clone(),
    };
    let n_r = dual_range_for(&beta, &s, (k_max + n_max as i64 + 2) as f64)?;
    let p = dual_model_points(&alpha, &beta, &s, (-n_r, n_r))?;
    let e = enumerate_blocks(&p, 0)?;
    let n_list: Vec<usize> = (1..=n_max).collect();
    let (d, table) = delta_and_means(&e, &mes, &n_list, (-k_max, k_max))?;
    let verdict = avdonin_check(&d, &table, &len, n_max)?;
    emit_json(common, &json!({ "tie_break": TIE_BREAK, "n_range": [-n_r, n_r], "verdict": verdict }))
}

fn gram(points: &Path, set: &str, matrix: Option<&Path>, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let p = load_points(points)?;
    let g = gram_matrix(&p, &s)?;
    let (lambda_min, lambda_max) = extreme_eigs(&g)?;
    if let Some(path) = matrix {
        let mut text = String::from("j,k,re,im\n");
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                let z = g[(j, k)];
                let _ = writeln!(text, "{j},{k},{:.16e},{:.16e}", z.re, z.im);
            }
        }
        write_file(path, &text)?;
    }
    let radius = p.points().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let report = GramReport {
        points: p.range().to_string(),
        region: format!("{} piece(s), mes {}", s.pieces().len(), s.volume()?),
        size: p.len(),
        lambda_min,
        lambda_max,
        tolerance: EIG_TOLERANCE,
        radius,
    };
    emit_json(common, &report)
}

fn bounds_plot(trace: &BoundTrace) -> PlotData {
    let lmin = trace.rows.iter().map(|r| (r.radius, r.lambda_min)).collect();
    PlotData { lambda_min: lmin, ..PlotData::default() }
}

fn bounds(points: &Path, set: &str, radii: &str, plot_dir: Option<&Path>, common: &Common) -> CliResult<()> {
    let alg = load_algebra(common.algebra.as_deref())?;
    let s = load_region(&alg, set)?;
    let p = load_points(points)?;
    let radii: Vec<f64> = parse_list(radii, "radius")?;
    let trace = riesz_bound_trace(&p, &radii, &s)?;
    if let Some(dir) = plot_dir {
        emit_plotdata(&bounds_plot(&trace), PlotKind::Bounds, dir)?;
    }
    let summary = json!({ "radii": radii, "lambda_min": trace.lambda_min(), "tolerance": EIG_TOLERANCE });
    emit(common, &trace.to_csv(), summary)
}

/// Everything a config determines before any stage runs.
struct Setup {
    cfg: ExperimentConfig,
    base: PathBuf,
    alg: Algebra,
    alpha: Vec<QValue>,
    beta: Vec<QValue>,
    window: RegionSet,
    set: RegionSet,
    translate: Option<Vec<String>>,
}

impl Setup {
    fn load(path: &Path) -> CliResult<Setup> {
        let (cfg, base) = ExperimentConfig::load(path)?;
        let ex = &cfg.experiment;
        let alg = load_algebra(ex.algebra.as_ref().map(|p| resolve(&base, p)).as_deref())?;
        let alpha = parse_values(&alg, &ex.alpha.join(","))?;
        let beta = parse_values(&alg, &ex.beta.join(","))?;
        let window = parse_window(&alg, &ex.window)?;
        let set_arg = if ex.set.trim_start().starts_with(['[', '(']) {
            ex.set.clone()
        } else {
            resolve(&base, Path::new(&ex.set)).to_string_lossy().into_owned()
        };
        let mut set = load_region(&alg, &set_arg)?;
        let mut translate = None;
        if let Some(seed) = ex.seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<String> = (0..set.dim()).map(|_| format!("{}/1000", rng.random_range(0..1000))).collect();
            set = set.translated(&parse_values(&alg, &t.join(","))?)?;
            translate = Some(t);
        }
        Ok(Setup { cfg, base, alg, alpha, beta, window, set, translate })
    }

    fn params(&self) -> DualityParams {
        let r = &self.cfg.ranges;
        DualityParams { radii: r.radii.clone(), n_max: r.n_max, k_max: r.k_max, disc_n: r.disc_n, disc_j: r.disc_j }
    }
}

fn duality(config: &Path, out: Option<&Path>) -> CliResult<()> {
    let setup = Setup::load(config)?;
    let report = duality_experiment(&setup.alpha, &setup.beta, &setup.window, &setup.set, &setup.params())?;
    let doc = json!({
        "version": DUALITY_VERSION,
        "config": setup.cfg,
        "translate": setup.translate,
        "duality": report,
    });
    emit_json(&Common { algebra: None, out: out.map(Path::to_path_buf) }, &doc)
}

fn report(config: &Path, out_dir: Option<&Path>) -> CliResult<()> {
    let setup = Setup::load(config)?;
    let ranges = &setup.cfg.ranges;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => resolve(&setup.base, &setup.cfg.experiment.output),
    };
    let (alpha, beta, s) = (&setup.alpha, &setup.beta, &setup.set);

    let special = make_special_lattice(alpha, beta)?;
    let primal = cut_and_project(&special.gamma, &setup.window, &SearchBox::symmetric(alpha.len(), ranges.gen_range))?;
    let dual = dual_model_points(alpha, beta, s, (-ranges.gen_range, ranges.gen_range))?;
    let primal_density = density_estimate(&primal, &ranges.density_radii)?;
    let dual_density = density_estimate(&dual, &ranges.density_radii)?;
    let block_bound = block_counting_bound(&dual)?;

    let zero = vec![QValue::zero(&setup.alg); alpha.len()];
    let trace = discrepancy_trace(s, alpha, &zero, (0, ranges.disc_n), false)?;
    let bmo = bmo_summary(&trace, ranges.bmo_max)?;

    let duality = duality_experiment(alpha, beta, &setup.window, s, &setup.params())?;

    write_file(&dir.join("points.csv"), &primal.to_csv())?;
    write_file(&dir.join("dual.csv"), &dual.to_csv())?;
    write_file(&dir.join("Dn.csv"), &trace.to_csv())?;
    write_file(&dir.join("bounds_primal.csv"), &duality.primal.to_csv())?;
    write_file(&dir.join("bounds_dual.csv"), &duality.dual.to_csv())?;
    let plot = dir.join("plot");
    emit_plotdata(&trace_plot(&trace), PlotKind::Discrepancy, &plot)?;
    emit_plotdata(&bounds_plot(&duality.primal), PlotKind::Bounds, &plot.join("primal"))?;
    emit_plotdata(&bounds_plot(&duality.dual), PlotKind::Bounds, &plot.join("dual"))?;

    let evidence = evidence_lines(&trace, &bmo, &duality);
    let doc = json!({
        "version": REPORT_VERSION,
        "config": setup.cfg,
        "translate": setup.translate,
        "primal": {
            "points": primal.len(),
            "range": primal.range(),
            "separation": separation(&primal),
            "density": primal_density,
        },
        "dual": {
            "points": dual.len(),
            "range": dual.range(),
            "separation": separation(&dual),
            "density": dual_density,
            "block_bound": block_bound,
        },
        "discrepancy": {
            "n_range": [0, ranges.disc_n],
            "mes": trace.mes,
            "max_abs": trace.max_abs,
            "argmax_n": trace.argmax_n,
            "bmo": bmo,
        },
        "duality": duality,
        "evidence": evidence,
    });
    write_file(&dir.join("report.json"), &to_json(&doc))?;
    print!("{}", to_json(&json!({ "report": dir.join("report.json"), "evidence": doc["evidence"] })));
    Ok(())
}

fn evidence_lines(trace: &DiscrepancyTrace, bmo: &BmoStat, d: &quasilab::riesz::DualityReport) -> Vec<String> {
    let fmt = |t: &BoundTrace| {
        let parts: Vec<String> = t.rows.iter().map(|r| format!("R={}: {:.6e}", r.radius, r.lambda_min)).collect();
        parts.join(", ")
    };
    let mut out = vec![
        format!("max |D_n| for 0 <= n <= {}: {:.6} at n = {}", trace.n_end(), trace.max_abs, trace.argmax_n),
        format!("BMO over windows up to {}: {:.6}", bmo.windows.last().map_or(0, |w| w.0), bmo.value),
        format!("primal lambda_min on S: {}", fmt(&d.primal)),
        format!("dual lambda_min on I: {}", fmt(&d.dual)),
        format!("orbit statistic on S: {:.6} ({})", d.orbit_statistic.max_abs, d.orbit_statistic.windows),
    ];
    match (&d.avdonin, &d.avdonin_error) {
        (Some(v), _) => out.push(match v.satisfied_at {
            Some(n) => format!("averaged condition met at N = {n}, margin {:.6} below {:.6}", v.margin, v.threshold),
            None => format!("averaged condition not met for N <= {}, best deviation {:.6}", v.n_max, v.sup_dev),
        }),
        (None, Some(e)) => out.push(format!("averaged condition not evaluated: {e}")),
        (None, None) => {}
    }
    if let Some(w) = &d.warning {
        out.push(w.clone());
    }
    out
}
