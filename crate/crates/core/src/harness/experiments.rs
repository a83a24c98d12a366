use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentId, RiccatiConfig};
use super::report::Recorder;
use super::svg::{line_plot, Series};
use super::{Artifact, ArtifactKind};
use crate::cheeger::{
    cheeger_exact, cheeger_sweep, cluster_sweep, diameter_lower_bound, verify_buser, BuserReport, CheegerResult,
    LocalRatioMeter,
};
use crate::error::{Error, Result};
use crate::manifold::generators;
use crate::manifold::{geodesic_distance, off, Domain, GraphEdge, Partition, SurfaceMesh, WeightedGraph};
use crate::riccati::{max_existence_time, psi_closed_form, psi_upper_bound, ComparisonParams, RhoSide, Rk4};
use crate::spectral::{lambda1, lambda1_cluster, SolverConfig};
use crate::tube::{
    boundary_ratio_bound, graph_diameter, level_profile, signed_distance, tube_growth_check, tube_set,
    BoundaryRatioReport, ProfileSide, TubeProfile,
};

pub(super) struct Outcome {
    pub recorder: Recorder,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            recorder: Recorder::default(),
            artifacts: Vec::new(),
        }
    }

    fn artifact(&mut self, kind: ArtifactKind, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            kind,
            name: name.into(),
            contents,
        });
    }

    fn export_mesh(&mut self, cfg: &ExperimentConfig, name: &str, mesh: &SurfaceMesh) -> Result<()> {
        if cfg.output.export_meshes {
            let text = off::format_off(mesh)?;
            self.artifact(ArtifactKind::Off, &format!("{name}.off"), text);
        }
        Ok(())
    }
}

pub(super) fn run(id: ExperimentId, cfg: &ExperimentConfig) -> Result<Outcome> {
    match id {
        ExperimentId::Riccati => riccati(cfg),
        ExperimentId::CheegerBound => cheeger_bound(cfg),
        ExperimentId::Spectral => spectral(cfg),
        ExperimentId::Lemma31 => lemma31(cfg),
        ExperimentId::Buser => buser(cfg),
        ExperimentId::Tube => tube(cfg),
        ExperimentId::Prop25 => prop25(cfg),
    }
}

/// Independent stream per experiment and purpose.
fn rng(seed: u64, id: ExperimentId, purpose: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((id as u64) << 32) | purpose);
    r
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi / lo
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

struct CaseError {
    params: ComparisonParams,
    max_abs: f64,
    max_rel: f64,
    worst_t: f64,
    samples: usize,
}

/// Compares the closed form with RK4 at `samples` grid times in `(0, t_end]`,
/// `t_end = min(T − inset, horizon)`.
fn compare_case(p: &ComparisonParams, rc: &RiccatiConfig) -> Result<CaseError> {
    let t_max = max_existence_time(p)?;
    let t_end = (t_max - rc.inset).min(rc.horizon);
    let last = (t_end / rc.step).floor() as usize;
    let mut out = CaseError {
        params: *p,
        max_abs: 0.0,
        max_rel: 0.0,
        worst_t: 0.0,
        samples: 0,
    };
    if last == 0 {
        return Ok(out);
    }
    let rk = Rk4::new(p, rc.step)?;
    let mut y = p.h;
    let mut idx = 0;
    for i in 1..=rc.samples {
        let target = (last * i / rc.samples).max(1);
        while idx < target {
            y = rk.advance(y);
            idx += 1;
        }
        if !y.is_finite() {
            return Err(Error::Data(format!(
                "RK4 diverged before t = {} for {p:?}",
                idx as f64 * rc.step
            )));
        }
        let t = idx as f64 * rc.step;
        let exact = psi_closed_form(p, t)?;
        let err = (exact - y).abs();
        let rel = err / exact.abs().max(1.0);
        if err > out.max_abs {
            out.max_abs = err;
            out.worst_t = t;
        }
        out.max_rel = out.max_rel.max(rel);
        out.samples += 1;
    }
    Ok(out)
}

fn riccati(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rc = &cfg.riccati;
    let mut o = Outcome::new();
    let mut r = rng(cfg.seed, ExperimentId::Riccati, 0);
    let cases: Vec<ComparisonParams> = (0..rc.cases)
        .map(|_| {
            let n = r.gen_range(2..=rc.n_max);
            let k = r.gen_range(0.0..=rc.k_max);
            let h = r.gen_range(-rc.h_max..=rc.h_max);
            ComparisonParams::new(n, k, h)
        })
        .collect::<Result<_>>()?;
    let errors: Vec<CaseError> = cases.par_iter().map(|p| compare_case(p, rc)).collect::<Result<_>>()?;
    let worst = errors
        .iter()
        .max_by(|a, b| a.max_abs.total_cmp(&b.max_abs))
        .expect("at least one case");
    let max_rel = errors.iter().map(|e| e.max_rel).fold(0.0, f64::max);
    let samples: usize = errors.iter().map(|e| e.samples).sum();
    let over = errors.iter().filter(|e| e.max_abs > rc.tolerance).count();
    let m = "closed form vs RK4";
    let rec = &mut o.recorder;
    rec.metric("oracle", "cases", rc.cases as f64, m, None);
    rec.metric("oracle", "samples", samples as f64, m, None);
    rec.metric("oracle", "step", rc.step, "RK4", None);
    rec.metric("oracle", "max_abs_error", worst.max_abs, m, Some(rc.tolerance));
    rec.metric(
        "oracle",
        "max_rel_error",
        max_rel,
        "closed form vs RK4, error / max(|ψ|, 1)",
        Some(rc.tolerance),
    );
    rec.metric("oracle", "cases_over_tolerance", over as f64, m, Some(rc.tolerance));
    rec.metric("worst_case", "n", worst.params.n as f64, m, None);
    rec.metric("worst_case", "k", worst.params.k, m, None);
    rec.metric("worst_case", "h", worst.params.h, m, None);
    rec.metric("worst_case", "t", worst.worst_t, m, None);
    rec.metric(
        "worst_case",
        "t_max",
        max_existence_time(&worst.params)?,
        "closed form",
        None,
    );
    rec.check(
        "oracle_abs_error",
        worst.max_abs <= rc.tolerance,
        worst.max_abs,
        format!("<= {:e}", rc.tolerance),
        m,
        Some(rc.tolerance),
    );

    // Constant solutions: H at the equilibrium (n−1)√K.
    let mut r = rng(cfg.seed, ExperimentId::Riccati, 1);
    let constant: Vec<ComparisonParams> = (0..rc.constant_cases)
        .map(|_| {
            let n = r.gen_range(2..=rc.n_max);
            let k = r.gen_range(0.0..=rc.k_max);
            ComparisonParams::new(n, k, (n - 1) as f64 * k.sqrt())
        })
        .collect::<Result<_>>()?;
    let grid = 1000;
    let dev: Vec<(f64, f64)> = constant
        .par_iter()
        .map(|p| -> Result<(f64, f64)> {
            let mut closed = 0.0f64;
            for j in 0..=grid {
                let t = rc.horizon * j as f64 / grid as f64;
                closed = closed.max((psi_closed_form(p, t)? - p.h).abs());
            }
            let rk = Rk4::new(p, rc.step)?;
            let steps = (rc.horizon / rc.step).round() as usize;
            let (mut y, mut dev) = (p.h, 0.0f64);
            for _ in 0..steps {
                y = rk.advance(y);
                dev = dev.max((y - p.h).abs());
            }
            Ok((closed, dev))
        })
        .collect::<Result<_>>()?;
    let closed = dev.iter().map(|d| d.0).fold(0.0, f64::max);
    let rk = dev.iter().map(|d| d.1).fold(0.0, f64::max);
    let tol = rc.constant_tolerance;
    rec.metric("constant", "cases", rc.constant_cases as f64, "closed form", None);
    rec.metric(
        "constant",
        "max_deviation",
        closed,
        "closed form on 1001 times",
        Some(tol),
    );
    rec.metric("constant", "rk4_max_deviation", rk, "RK4", None);
    rec.check(
        "constant_solution",
        closed <= tol,
        closed,
        format!("<= {tol:e}"),
        "closed form",
        Some(tol),
    );
    Ok(o)
}

/// Connected graph on `n` vertices: a random tree plus up to `n` extra edges,
/// with vertex weights between half and twice the weighted degree.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize) -> Result<WeightedGraph> {
    let mut edges: Vec<GraphEdge> = Vec::new();
    let has = |a: usize, b: usize, edges: &[GraphEdge]| {
        edges
            .iter()
            .any(|e| (e.a.min(e.b), e.a.max(e.b)) == (a.min(b), a.max(b)))
    };
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let conductance = rng.gen_range(0.05..1.0);
        edges.push(GraphEdge {
            a: parent,
            b: v,
            conductance,
            length: 1.0,
        });
    }
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let conductance = rng.gen_range(0.05..1.0);
        if a != b && !has(a, b, &edges) {
            edges.push(GraphEdge {
                a,
                b,
                conductance,
                length: 1.0,
            });
        }
    }
    let mut degree = vec![0.0; n];
    for e in &edges {
        degree[e.a] += e.conductance;
        degree[e.b] += e.conductance;
    }
    let weights = degree.iter().map(|d| d * rng.gen_range(0.5..=2.0)).collect();
    WeightedGraph::new(weights, &edges)
}

fn cheeger_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = &cfg.cheeger_bound;
    let mut o = Outcome::new();
    let mut r = rng(cfg.seed, ExperimentId::CheegerBound, 0);
    let graphs: Vec<WeightedGraph> = (0..c.graphs)
        .map(|_| {
            let n = r.gen_range(c.min_vertices..=c.max_vertices);
            random_connected_graph(&mut r, n)
        })
        .collect::<Result<_>>()?;
    let dense = SolverConfig {
        dense_threshold: usize::MAX,
        ..cfg.solver_config()
    };
    let rows: Vec<(f64, f64, f64, f64)> = graphs
        .par_iter()
        .map(|g| -> Result<_> {
            let ev = lambda1(&g.laplacian(), &dense)?;
            let exact = cheeger_exact(g)?;
            let sweep = cheeger_sweep(g, &ev.eigenvector)?;
            Ok((ev.lambda1, exact.h, sweep.h, g.max_degree_ratio()))
        })
        .collect::<Result<_>>()?;
    let min_slack = rows
        .iter()
        .map(|&(l, h, _, _)| l - h * h / 4.0)
        .fold(f64::INFINITY, f64::min);
    let min_ratio = rows
        .iter()
        .map(|&(l, h, _, _)| l / (h * h / 4.0))
        .fold(f64::INFINITY, f64::min);
    let sweep_gap = rows.iter().map(|&(_, h, s, _)| s - h).fold(f64::INFINITY, f64::min);
    let sweep_ok = rows.iter().all(|&(_, h, s, _)| s >= h * (1.0 - 1e-12));
    let degree = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let rec = &mut o.recorder;
    rec.metric(
        "graphs",
        "count",
        c.graphs as f64,
        "ChaCha8 random connected graphs",
        None,
    );
    rec.metric(
        "graphs",
        "max_degree_ratio",
        degree,
        "weighted degree / vertex weight",
        None,
    );
    rec.metric("bound", "min_slack", min_slack, "dense λ₁ − exact h²/4", Some(c.slack));
    rec.metric("bound", "min_ratio", min_ratio, "dense λ₁ / (exact h²/4)", None);
    rec.metric("sweep", "min_gap", sweep_gap, "sweep h − exact h", Some(1e-12));
    rec.check(
        "cheeger_lower_bound",
        min_slack >= -c.slack,
        min_slack,
        format!(">= -{:e}", c.slack),
        "dense λ₁, exact h",
        Some(c.slack),
    );
    rec.check(
        "sweep_upper_bound",
        sweep_ok,
        sweep_gap,
        ">= 0".into(),
        "Fiedler sweep vs exact",
        Some(1e-12),
    );
    Ok(o)
}

struct SpectralMeasure {
    lambda1: f64,
    cluster: usize,
    sweep: CheegerResult,
}

fn measure_spectrum<D: Domain + ?Sized>(domain: &D, cfg: &ExperimentConfig) -> Result<SpectralMeasure> {
    let cluster = lambda1_cluster(&domain.laplacian(), &cfg.solver_config(), cfg.solver.cluster_max)?;
    let sweep = cluster_sweep(domain, &cluster, &cfg.sweep_options())?;
    Ok(SpectralMeasure {
        lambda1: cluster.lambda1,
        cluster: cluster.vectors.len(),
        sweep,
    })
}

fn spectral(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = &cfg.spectral;
    let mut o = Outcome::new();
    let sphere = generators::icosphere(s.icosphere_level)?;
    let torus = generators::flat_torus(s.torus_grid, s.torus_grid, 1.0, 1.0)?;
    o.export_mesh(cfg, "sphere", &sphere)?;
    o.export_mesh(cfg, "torus", &torus.mesh)?;
    let (ms, mt) = rayon::join(|| measure_spectrum(&sphere, cfg), || measure_spectrum(&torus.mesh, cfg));
    let (ms, mt) = (ms?, mt?);
    let tol = Some(cfg.solver.tolerance);
    let rec = &mut o.recorder;
    let equator = sphere.partition_measures(&generators::equator_cut(&sphere)?)?.ratio();
    let straight = torus.mesh.partition_measures(&torus.straight_cut()?)?.ratio();
    for (name, m, cut) in [("sphere", &ms, equator), ("torus", &mt, straight)] {
        rec.metric(name, "lambda1", m.lambda1, "cotan Laplacian, lumped mass", tol);
        rec.metric(
            name,
            "cluster_size",
            m.cluster as f64,
            "eigenvalue cluster",
            Some(cfg.solver.cluster_tolerance),
        );
        rec.metric(name, "h_sweep", m.sweep.h, "cluster sweep", None);
        rec.metric(name, "h_canonical_cut", cut, "partition ratio", None);
    }
    rec.check_range("sphere_lambda1", ms.lambda1, 1.96, 2.04, "cotan Laplacian");
    rec.check_range("sphere_h_sweep", ms.sweep.h, 0.9, 1.1, "cluster sweep");
    rec.check_relative("torus_lambda1", mt.lambda1, 4.0 * PI * PI, 0.02, "cotan Laplacian");
    rec.check_relative("torus_h_sweep", mt.sweep.h, 4.0, 0.10, "cluster sweep");
    for path in &s.meshes {
        let mesh = off::load_mesh(path)?;
        let m = measure_spectrum(&mesh, cfg)?;
        let subject = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        rec.metric(&subject, "vertices", mesh.vertex_count() as f64, "OFF input", None);
        rec.metric(&subject, "lambda1", m.lambda1, "cotan Laplacian, lumped mass", tol);
        rec.metric(&subject, "h_sweep", m.sweep.h, "cluster sweep", None);
    }
    Ok(o)
}

struct Family {
    name: &'static str,
    mesh: SurfaceMesh,
    partition: Partition,
    k: f64,
}

fn lemma31_families(cfg: &ExperimentConfig) -> Result<Vec<Family>> {
    let l = &cfg.lemma31;
    let sphere = generators::icosphere(l.icosphere_level)?;
    let sphere_cut = generators::equator_cut(&sphere)?;
    let torus = generators::flat_torus(l.torus_grid, l.torus_grid, 1.0, 1.0)?;
    let torus_cut = torus.straight_cut()?;
    let bell = generators::dumbbell(l.dumbbell_neck, l.dumbbell_level)?;
    let bell_cut = bell.neck_cut()?;
    Ok(vec![
        Family {
            name: "sphere",
            mesh: sphere,
            partition: sphere_cut,
            k: 0.0,
        },
        Family {
            name: "torus",
            mesh: torus.mesh,
            partition: torus_cut,
            k: 0.0,
        },
        Family {
            name: "dumbbell",
            mesh: bell.mesh,
            partition: bell_cut,
            k: l.dumbbell_k,
        },
    ])
}

/// Ratios at `samples` pairs: `r` uniform in `[r_min, r_max]`, `x` uniform
/// among vertices within `r` of the interface.
fn sample_ratios(f: &Family, cfg: &ExperimentConfig, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let l = &cfg.lemma31;
    let seeds = f.mesh.interface_vertices(&f.partition);
    let dist = geodesic_distance(&f.mesh, &seeds)?;
    let mut order: Vec<usize> = (0..f.mesh.vertex_count()).collect();
    order.sort_by(|&a, &b| dist.values[a].total_cmp(&dist.values[b]).then(a.cmp(&b)));
    let mut r = rng(seed, ExperimentId::Lemma31, stream);
    let pairs: Vec<(usize, f64)> = (0..l.samples)
        .map(|_| {
            let radius = r.gen_range(l.r_min..=l.r_max);
            let reach = order.partition_point(|&v| dist.values[v] <= radius).max(1);
            (order[r.gen_range(0..reach)], radius)
        })
        .collect();
    pairs
        .par_iter()
        .map_init(
            || LocalRatioMeter::new(&f.mesh, &f.partition, f.k),
            |meter, &(x, radius)| match meter {
                Ok(m) => m.ratio(x, radius),
                Err(e) => Err(Error::InvalidParams(e.to_string())),
            },
        )
        .collect()
}

fn lemma31(cfg: &ExperimentConfig) -> Result<Outcome> {
    let l = &cfg.lemma31;
    let mut o = Outcome::new();
    let families = lemma31_families(cfg)?;
    let seeds = [cfg.seed, cfg.seed.wrapping_add(1)];
    let mut per_seed_min = [f64::INFINITY; 2];
    let mut total = 0usize;
    let mut finite_total = 0usize;
    let mut all_positive = true;
    let mut global_min = f64::INFINITY;
    for (fi, f) in families.iter().enumerate() {
        let mut finite_family = Vec::new();
        for (si, &seed) in seeds.iter().enumerate() {
            let ratios = sample_ratios(f, cfg, seed, fi as u64)?;
            total += ratios.len();
            let finite: Vec<f64> = ratios.into_iter().filter(|x| x.is_finite()).collect();
            let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
            per_seed_min[si] = per_seed_min[si].min(min);
            o.recorder.metric(
                f.name,
                &format!("min_seed{si}"),
                min,
                "local ratio, Dijkstra balls",
                None,
            );
            finite_family.extend(finite);
        }
        finite_family.sort_by(f64::total_cmp);
        all_positive &= finite_family.iter().all(|&x| x > 0.0);
        finite_total += finite_family.len();
        let min = finite_family.first().copied().unwrap_or(f64::INFINITY);
        global_min = global_min.min(min);
        let rec = &mut o.recorder;
        rec.metric(f.name, "k", f.k, "curvature bound", None);
        rec.metric(
            f.name,
            "finite_samples",
            finite_family.len() as f64,
            "local ratio",
            None,
        );
        rec.metric(f.name, "min", min, "local ratio, Dijkstra balls", None);
        rec.metric(
            f.name,
            "median",
            median(&finite_family),
            "local ratio, Dijkstra balls",
            None,
        );
    }
    let stability = spread(&per_seed_min);
    let rec = &mut o.recorder;
    rec.metric("all", "samples", total as f64, "(x, r) pairs", None);
    rec.metric("all", "finite_samples", finite_total as f64, "(x, r) pairs", None);
    rec.metric("all", "min", global_min, "local ratio, Dijkstra balls", None);
    rec.metric(
        "all",
        "seed_min_ratio",
        stability,
        "max/min of per-seed minima",
        Some(l.stability_factor),
    );
    rec.check(
        "sample_count",
        total >= 300,
        total as f64,
        ">= 300".into(),
        "(x, r) pairs",
        None,
    );
    rec.check(
        "positivity",
        all_positive && finite_total > 0,
        global_min,
        "> 0 on every finite sample".into(),
        "local ratio",
        None,
    );
    rec.check(
        "seed_stability",
        stability <= l.stability_factor,
        stability,
        format!("<= {}", l.stability_factor),
        "per-seed minima",
        Some(l.stability_factor),
    );

    // Diameter form of the lower bound. The constant also includes one
    // anchor per family at r = D, where sampled radii do not reach.
    let measured: Vec<Result<(f64, f64, f64)>> = families
        .par_iter()
        .map(|f| -> Result<(f64, f64, f64)> {
            let h = measure_spectrum(&f.mesh, cfg)?.sweep.h;
            let d = graph_diameter(&f.mesh);
            let x = f
                .mesh
                .interface_vertices(&f.partition)
                .first()
                .copied()
                .ok_or_else(|| Error::Data(format!("{} partition has no interface", f.name)))?;
            let mut meter =
                LocalRatioMeter::new(&f.mesh, &f.partition, f.k).map_err(|e| Error::InvalidParams(e.to_string()))?;
            Ok((h, d, meter.ratio(x, d)?))
        })
        .collect();
    let measured: Vec<(f64, f64, f64)> = measured.into_iter().collect::<Result<_>>()?;
    let anchor_min = measured
        .iter()
        .map(|m| m.2)
        .filter(|x| x.is_finite())
        .fold(f64::INFINITY, f64::min);
    let c_n = global_min.min(anchor_min);
    o.recorder
        .metric("all", "anchor_min", anchor_min, "local ratio at r = D", None);
    o.recorder
        .metric("all", "c_n", c_n, "min of sampled and anchor ratios", None);
    for (f, &(h, d, anchor)) in families.iter().zip(&measured) {
        let bound = diameter_lower_bound(f.mesh.dimension(), f.k, d, c_n, l.include_sqrt_k)?;
        let rec = &mut o.recorder;
        rec.metric(f.name, "diameter", d, "max Dijkstra distance", None);
        rec.metric(
            f.name,
            "anchor_ratio",
            anchor,
            "local ratio at r = D, first interface vertex",
            None,
        );
        rec.metric(f.name, "h_sweep", h, "cluster sweep", None);
        rec.metric(
            f.name,
            "diameter_bound",
            bound,
            "C_n over sampled and anchor ratios",
            None,
        );
        rec.check(
            &format!("{}_diameter_bound", f.name),
            h >= bound,
            h,
            format!(">= {bound:e}"),
            "cluster sweep",
            None,
        );
    }
    Ok(o)
}

fn buser(cfg: &ExperimentConfig) -> Result<Outcome> {
    let b = &cfg.buser;
    let mut o = Outcome::new();
    let solver = cfg.solver_config();
    let mut epsilons = b.epsilons.clone();
    if !epsilons.contains(&b.epsilon) {
        epsilons.push(b.epsilon);
    }
    let runs: Vec<Vec<BuserReport>> = b
        .necks
        .par_iter()
        .map(|&neck| -> Result<Vec<BuserReport>> {
            let bell = generators::dumbbell(neck, b.dumbbell_level)?;
            let p = bell.neck_cut()?;
            epsilons
                .iter()
                .map(|&e| verify_buser(&bell.mesh, &p, b.k, e, &solver))
                .collect()
        })
        .collect::<Result<_>>()?;
    let rec = &mut o.recorder;
    let mut variational = true;
    let mut mean_ok = true;
    let mut worst_margin = f64::INFINITY;
    for (neck, reports) in b.necks.iter().zip(&runs) {
        for rep in reports {
            let subject = format!("neck={neck},epsilon={}", rep.epsilon);
            record_buser(rec, &subject, rep, cfg.solver.tolerance);
            variational &= rep.variational_ok;
            mean_ok &= rep.mean_integral <= rep.mean_bound;
            worst_margin = worst_margin.min((rep.rayleigh - rep.lambda1) / rep.rayleigh);
        }
    }
    let mut plot = Vec::new();
    for (j, &e) in epsilons.iter().enumerate() {
        let c: Vec<f64> = runs.iter().map(|r| r[j].c_emp).collect();
        let s = spread(&c);
        rec.metric(
            &format!("epsilon={e}"),
            "c_emp_max",
            c.iter().copied().fold(0.0, f64::max),
            "RQ·r/𝔥",
            None,
        );
        rec.metric(
            &format!("epsilon={e}"),
            "c_emp_spread",
            s,
            "max/min over necks",
            Some(b.max_spread),
        );
        if e == b.epsilon {
            rec.check(
                "c_emp_spread",
                s <= b.max_spread,
                s,
                format!("< {}", b.max_spread),
                "max/min C_emp over necks",
                Some(b.max_spread),
            );
        }
        plot.push((e, b.necks.iter().copied().zip(c).collect::<Vec<_>>()));
    }
    rec.check(
        "variational",
        variational,
        worst_margin,
        "λ₁ <= RQ(f) within 1e-9 relative".into(),
        "dense or Lanczos λ₁",
        Some(1e-9),
    );
    rec.check(
        "mean_estimate",
        mean_ok,
        f64::NAN,
        "|∫f| <= Vol(Σ̃^r)·Vol(M)".into(),
        "mass quadrature",
        None,
    );

    if b.sphere_level > 0 {
        let sphere = generators::icosphere(b.sphere_level)?;
        let p = generators::equator_cut(&sphere)?;
        let rep = verify_buser(&sphere, &p, 0.0, b.sphere_epsilon, &solver)?;
        record_buser(rec, "sphere", &rep, cfg.solver.tolerance);
        rec.check(
            "sphere_variational",
            rep.variational_ok,
            (rep.rayleigh - rep.lambda1) / rep.rayleigh,
            "λ₁ <= RQ(f) within 1e-9 relative".into(),
            "Lanczos λ₁",
            Some(1e-9),
        );
    }
    if cfg.output.svg {
        let labels: Vec<String> = plot.iter().map(|(e, _)| format!("ε = {e}")).collect();
        let series: Vec<Series> = plot
            .iter()
            .zip(&labels)
            .map(|((_, pts), label)| Series {
                label,
                points: pts.clone(),
            })
            .collect();
        o.artifact(
            ArtifactKind::Svg,
            "buser_c_emp.svg",
            line_plot("C_emp across the dumbbell family", "neck scale", "C_emp", &series),
        );
    }
    Ok(o)
}

fn record_buser(rec: &mut Recorder, subject: &str, rep: &BuserReport, tol: f64) {
    rec.metric(subject, "h_frak", rep.h_frak, "partition ratio", None);
    rec.metric(subject, "r", rep.r, "ε·min(K^-1/2, 1/𝔥)", None);
    rec.metric(
        subject,
        "lambda1",
        rep.lambda1,
        "cotan Laplacian, lumped mass",
        Some(tol),
    );
    rec.metric(subject, "rayleigh", rep.rayleigh, "test function", None);
    rec.metric(subject, "c_emp", rep.c_emp, "RQ·r/𝔥", None);
    rec.metric(subject, "sigma_count", rep.sigma_count as f64, "tilde sets", None);
    rec.metric(subject, "a_count", rep.a_count as f64, "tilde sets", None);
    rec.metric(subject, "b_count", rep.b_count as f64, "tilde sets", None);
    rec.metric(subject, "cover_centers", rep.cover_centers as f64, "greedy r-net", None);
    rec.metric(subject, "cover_s", rep.cover_s as f64, "greedy r-net", None);
    rec.metric(subject, "cover_m", rep.cover_m as f64, "greedy r-net", None);
    rec.metric(
        subject,
        "cover_multiplicity",
        rep.cover_multiplicity as f64,
        "3r-ball overlap",
        None,
    );
    rec.metric(subject, "mean_integral", rep.mean_integral, "mass quadrature", None);
    rec.metric(subject, "mean_bound", rep.mean_bound, "Vol(Σ̃^r)·Vol(M)", None);
}

fn record_growth(rec: &mut Recorder, subject: &str, profile: &TubeProfile, c: f64) -> Result<bool> {
    let g = tube_growth_check(profile, c)?;
    rec.metric(subject, "envelope_c", c, "Riccati envelope", None);
    rec.metric(subject, "f0", profile.f0(), "interface length", None);
    rec.metric(subject, "bin_width", profile.bin_width(), "level profile", None);
    rec.metric(
        subject,
        "worst_margin",
        g.worst_margin,
        "f(0)·B(t) − V(0,t)",
        Some(g.slack),
    );
    rec.metric(subject, "worst_t", g.worst_t, "level profile", None);
    rec.metric(subject, "violations", g.violations as f64, "bin edges", Some(g.slack));
    Ok(g.pass)
}

fn profile_series(profile: &TubeProfile) -> Vec<(f64, f64)> {
    profile.edges.iter().copied().zip(profile.f.iter().copied()).collect()
}

fn tube(cfg: &ExperimentConfig) -> Result<Outcome> {
    let t = &cfg.tube;
    let mut o = Outcome::new();
    // Both model interfaces are geodesics in flat or positively curved
    // space: H = 0, K = 0.
    let c = psi_upper_bound(&ComparisonParams::new(2, 0.0, 0.0)?, RhoSide::NonnegativeRho)?;

    let sphere = generators::icosphere(t.icosphere_level)?;
    let p = generators::equator_cut(&sphere)?;
    let field = signed_distance(&sphere, &p)?;
    let pole = generators::north_pole(&sphere).ok_or_else(|| Error::Data("icosphere has no pole vertex".into()))?;
    let band = tube_set(&sphere, &field, t.band_t)?;
    let sp = level_profile(&sphere, &field, t.bins, ProfileSide::Positive)?;
    let side = sphere.partition_measures(&p)?.vol_a;
    let binned: f64 = sp.bin_volumes.iter().sum();
    let coarse = level_profile(&sphere, &field, t.monotone_bins, ProfileSide::Positive)?;
    // Non-increase up to a shift of one bin.
    let bump = (0..coarse.f.len())
        .flat_map(|i| (i + 2..coarse.f.len()).map(move |j| (i, j)))
        .map(|(i, j)| coarse.f[j] - coarse.f[i])
        .fold(f64::NEG_INFINITY, f64::max);

    let torus = generators::flat_torus(t.torus_grid, t.torus_grid, 1.0, 1.0)?;
    let tp = torus.straight_cut()?;
    let tfield = signed_distance(&torus.mesh, &tp)?;
    let tprof = level_profile(&torus.mesh, &tfield, t.bins, ProfileSide::Positive)?;
    let tneg = level_profile(&torus.mesh, &tfield, t.bins, ProfileSide::Negative)?;

    let rec = &mut o.recorder;
    let band_exact = 4.0 * PI * t.band_t.sin();
    rec.metric(
        "sphere",
        "pole_distance",
        field.values[pole],
        "multi-source Dijkstra",
        None,
    );
    rec.metric("sphere", "band_area", band.volume, "faces inside the tube", None);
    rec.metric("sphere", "side_volume", side, "face areas", None);
    rec.metric("sphere", "binned_volume", binned, "face areas by bin", Some(1e-12));
    rec.metric(
        "sphere",
        "max_rise",
        bump,
        "f(a_j) − f(a_i), j >= i + 2",
        Some(coarse.bin_width()),
    );
    rec.check_relative(
        "sphere_pole_distance",
        field.values[pole],
        PI / 2.0,
        0.05,
        "multi-source Dijkstra",
    );
    rec.check_relative(
        "sphere_band_area",
        band.volume,
        band_exact,
        0.10,
        "faces inside the tube",
    );
    rec.check_relative("sphere_f0", sp.f0(), 2.0 * PI, 0.05, "interface length");
    rec.check_relative("sphere_binned_volume", binned, side, 1e-12, "face areas");
    rec.check(
        "sphere_f_monotone",
        bump <= 0.0,
        bump,
        "<= 0".into(),
        "level profile",
        None,
    );
    let pass = record_growth(rec, "sphere", &sp, c)?;
    rec.check(
        "sphere_growth",
        pass,
        f64::NAN,
        "f(0)/V(0,t) >= 1/t within slack".into(),
        "level profile",
        None,
    );
    let pass = record_growth(rec, "torus", &tprof, c)?;
    rec.check(
        "torus_growth",
        pass,
        f64::NAN,
        "f(0)/V(0,t) >= 1/t within slack".into(),
        "level profile",
        None,
    );
    let pass = record_growth(rec, "torus_negative", &tneg, c)?;
    rec.check(
        "torus_negative_growth",
        pass,
        f64::NAN,
        "f(0)/V(0,t) >= 1/t within slack".into(),
        "level profile",
        None,
    );

    o.artifact(ArtifactKind::Csv, "tube_sphere.csv", sp.to_csv());
    o.artifact(ArtifactKind::Csv, "tube_torus.csv", tprof.to_csv());
    if cfg.output.svg {
        let series = [
            Series {
                label: "sphere",
                points: profile_series(&sp),
            },
            Series {
                label: "torus",
                points: profile_series(&tprof),
            },
        ];
        o.artifact(
            ArtifactKind::Svg,
            "tube_profiles.svg",
            line_plot("Level-set measure f(a)", "a", "f(a)", &series),
        );
    }
    o.export_mesh(cfg, "tube_sphere", &sphere)?;
    o.export_mesh(cfg, "tube_torus", &torus.mesh)?;
    Ok(o)
}

fn record_boundary(rec: &mut Recorder, subject: &str, r: &BoundaryRatioReport) {
    rec.metric(subject, "ratio", r.ratio, "boundary length / area", None);
    rec.metric(subject, "c0", r.c0, "Σ max(κ_g, (n−1)√K)·ℓ", None);
    rec.metric(subject, "diameter", r.diameter, "max Dijkstra distance", None);
    rec.metric(subject, "bound", r.bound, "C₀ e^{−C₀ D}", None);
    rec.metric(subject, "limit_bound", r.limit_bound, "1/D", None);
}

fn prop25(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.prop25;
    let mut o = Outcome::new();
    let disk = generators::flat_disk(p.disk_rings)?;
    let cap = generators::spherical_cap(PI / 2.0, p.cap_rings, p.cap_segments)?;
    let (d, c) = rayon::join(|| boundary_ratio_bound(&disk, p.k), || boundary_ratio_bound(&cap, p.k));
    let (d, c) = (d?, c?);
    let rec = &mut o.recorder;
    record_boundary(rec, "disk", &d);
    record_boundary(rec, "hemisphere", &c);
    let method = "discrete geodesic curvature";
    for (name, value, target) in [("disk_c0", d.c0, 2.0 * PI), ("hemisphere_c0", c.c0, 0.0)] {
        let tol = p.tolerance * target.abs().max(1.0);
        rec.check(
            name,
            (value - target).abs() <= tol,
            value,
            format!("{target} ± {tol}"),
            method,
            Some(p.tolerance),
        );
    }
    rec.check(
        "disk_bound",
        d.pass,
        d.ratio,
        format!(">= {:e}", d.bound),
        "ratio vs C₀ e^{−C₀ D}",
        None,
    );
    let want = if c.c0.abs() < 1e-14 { c.limit_bound } else { c.bound };
    rec.check(
        "hemisphere_bound",
        c.pass,
        c.ratio,
        format!(">= {want:e}"),
        "ratio vs C₀ e^{−C₀ D}",
        None,
    );
    let scan: Vec<Result<(usize, f64)>> = p
        .refinement
        .par_iter()
        .map(|&rings| Ok((rings, boundary_ratio_bound(&generators::flat_disk(rings)?, p.k)?.c0)))
        .collect();
    for s in scan {
        let (rings, c0) = s?;
        rec.metric(&format!("disk_rings={rings}"), "c0", c0, method, None);
    }
    o.export_mesh(cfg, "disk", &disk)?;
    o.export_mesh(cfg, "hemisphere", &cap)?;
    Ok(o)
}
