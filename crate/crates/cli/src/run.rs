//! Experiment dispatch.

use anyhow::{bail, Context, Result};
use serde_json::json;

use hallnum::ensemble::{run_ensemble, EnsembleSpec, EnsembleStats, Grids, ModelConfig, Observable};
use hallnum::hall::connes_sums;
use hallnum::localization::divergence_scan;
use hallnum::model::{build_hofstadter, build_lll, sample_disorder, DisorderModel, LatticeGeometry};
use hallnum::spectral::{band_edge_curve, eigendecompose};

use crate::config::{Experiment, RunConfig};
use crate::output::{num, opt, Table};

/// Everything an experiment produced, before it is written out.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    pub seeds: Vec<u64>,
    pub failures: usize,
    pub summary: serde_json::Value,
}

/// Resolved knobs that come from the command line rather than the file.
#[derive(Clone, Copy, Debug)]
pub struct Overrides {
    pub workers: usize,
    pub seed: Option<u64>,
}

pub fn base_seed(config: &RunConfig, o: &Overrides) -> u64 {
    o.seed.unwrap_or(config.ensemble.seed)
}

pub fn ensemble_spec(config: &RunConfig, o: &Overrides, observables: Vec<Observable>) -> Result<EnsembleSpec> {
    let model = config.model.clone().context("this experiment needs a model block")?;
    let e = &config.ensemble;
    let grids = Grids {
        energies: e.energies.clone(),
        lambdas: e.lambdas.clone(),
        fluxes: e.fluxes.clone(),
        sizes: e.sizes.clone(),
    };
    let mut spec = EnsembleSpec::new(model, config.disorder, e.realizations, base_seed(config, o), grids, observables)?;
    spec.settings = e.settings.clone();
    spec.workers = o.workers;
    spec.validate()?;
    Ok(spec)
}

/// Number of diagonalizations and the largest matrix dimension.
pub fn plan(config: &RunConfig) -> (usize, usize) {
    let e = &config.ensemble;
    match (&config.experiment, &config.model) {
        (Experiment::ConnesCheck, _) | (_, None) => (0, 0),
        (Experiment::BandEdges, Some(ModelConfig::Landau(s))) => (2 * e.lambdas.len(), s.dim()),
        (_, Some(ModelConfig::Landau(s))) => (e.lambdas.len() * e.realizations, s.dim()),
        (_, Some(ModelConfig::Lattice { .. })) => {
            let dim = e.sizes.iter().map(|s| s[0] * s[1]).max().unwrap_or(0);
            (e.lambdas.len() * e.fluxes.len() * e.sizes.len() * e.realizations, dim)
        }
    }
}

pub fn dispatch(config: &RunConfig, o: &Overrides) -> Result<Outcome> {
    match config.experiment {
        Experiment::Spectrum => spectrum(config, o),
        Experiment::ConnesCheck => connes(config),
        Experiment::BandEdges => band_edges(config),
        Experiment::Hall | Experiment::Localization | Experiment::Transport | Experiment::Sweep => ensemble(config, o),
    }
}

fn point_ids(stats: &EnsembleStats, k: usize) -> Vec<String> {
    let p = &stats.points[k].point;
    vec![
        num(p.energy),
        num(p.lambda),
        opt(p.flux.map(|f| f.p())),
        opt(p.flux.map(|f| f.q())),
        opt(p.size.map(|s| s[0])),
        opt(p.size.map(|s| s[1])),
    ]
}

const POINT_HEADER: [&str; 6] = ["energy", "lambda", "flux_p", "flux_q", "lx", "ly"];

fn ensemble(config: &RunConfig, o: &Overrides) -> Result<Outcome> {
    let spec = ensemble_spec(config, o, config.ensemble.observables.clone())?;
    let stats = run_ensemble(&spec)?;
    let mut out = Outcome { seeds: stats.seeds.clone(), failures: stats.failure_count(), ..Outcome::default() };

    let mut header = POINT_HEADER.to_vec();
    header.extend(["observable", "mean", "stderr", "count", "min", "max", "failures"]);
    let mut results = Table::new("results", &header, 7);
    let mut failures = Table::new("failures", &[&POINT_HEADER[..], &["realization", "seed", "message"]].concat(), 8);
    for (k, p) in stats.points.iter().enumerate() {
        for s in &p.observables {
            let mut row = point_ids(&stats, k);
            row.extend([
                s.name.clone(),
                num(s.mean),
                num(s.stderr),
                s.count.to_string(),
                num(s.min),
                num(s.max),
                p.failures.len().to_string(),
            ]);
            results.push(row);
            if s.name == "hall" && (s.mean - s.mean.round()).abs() > config.tolerances.integer {
                out.warnings.push(format!(
                    "hall at E={} λ={} is {:.4}, farther than {} from an integer",
                    p.point.energy, p.point.lambda, s.mean, config.tolerances.integer
                ));
            }
        }
        for f in &p.failures {
            let mut row = point_ids(&stats, k);
            let realization = if f.realization == usize::MAX { "ensemble".into() } else { f.realization.to_string() };
            row.extend([realization, f.seed.to_string(), f.message.clone()]);
            failures.push(row);
        }
    }
    out.tables.push(results);
    if out.failures > 0 {
        out.warnings.push(format!("{} realization failures recorded in failures.csv", out.failures));
        out.tables.push(failures);
    }

    if stats.points.iter().any(|p| p.profile.is_some()) {
        let mut header = POINT_HEADER.to_vec();
        header.extend(["dx", "dy", "radius", "mean", "stderr"]);
        let mut profiles = Table::new("kernel_profiles", &header, 8);
        for (k, p) in stats.points.iter().enumerate() {
            let Some(prof) = &p.profile else { continue };
            for j in 0..prof.len() {
                let mut row = point_ids(&stats, k);
                let d = prof.displacements[j];
                row.extend([d[0].to_string(), d[1].to_string(), num(prof.radius(j)), num(prof.values[j]), num(prof.stderrs[j])]);
                profiles.push(row);
            }
        }
        out.tables.push(profiles);
    }

    let mut summary = json!({ "points": stats.points.len(), "realizations": stats.n_realizations });
    if config.experiment == Experiment::Localization && config.ensemble.sizes.len() > 1 {
        let scan = divergence_scan(&spec)?;
        let mut t = Table::new("divergence", &["lx", "ly", "energy", "ell_2", "stderr", "is_argmax"], 3);
        for (s, size) in scan.sizes.iter().enumerate() {
            for (k, e) in scan.energies.iter().enumerate() {
                t.push(vec![
                    size[0].to_string(),
                    size[1].to_string(),
                    num(*e),
                    num(scan.ell[s][k]),
                    num(scan.stderr[s][k]),
                    (scan.argmax[s] == k).to_string(),
                ]);
            }
        }
        out.tables.push(t);
        summary["divergence"] = json!({ "e_star": scan.e_star, "growth": scan.growth, "interior": scan.interior });
    }
    out.summary = summary;
    Ok(out)
}

fn spectrum(config: &RunConfig, o: &Overrides) -> Result<Outcome> {
    let e = &config.ensemble;
    let seed0 = base_seed(config, o);
    let seeds: Vec<u64> = (0..e.realizations).map(|i| seed0 ^ i as u64).collect();
    let mut t = Table::new(
        "spectrum",
        &["lambda", "flux_p", "flux_q", "lx", "ly", "realization", "seed", "index", "eigenvalue"],
        8,
    );
    let model = config.model.as_ref().context("spectrum needs a model block")?;
    for &lambda in &e.lambdas {
        let disorder = DisorderModel { lambda, ..config.disorder };
        let mut configs: Vec<(Option<[usize; 2]>, Option<hallnum::model::FluxRational>)> = vec![];
        match model {
            ModelConfig::Lattice { .. } => {
                for s in &e.sizes {
                    for f in &e.fluxes {
                        configs.push((Some(*s), Some(*f)));
                    }
                }
            }
            ModelConfig::Landau(_) => configs.push((None, None)),
        }
        for (size, flux) in configs {
            for (i, &seed) in seeds.iter().enumerate() {
                let h = match (model, size, flux) {
                    (ModelConfig::Lattice { boundary, .. }, Some(s), Some(f)) => {
                        let g = LatticeGeometry::new(s[0], s[1], *boundary)?;
                        build_hofstadter(&g, &f, &disorder, &sample_disorder(&disorder, g.n_sites(), seed)?)?
                    }
                    (ModelConfig::Landau(spec), _, _) => {
                        build_lll(spec, &disorder, &sample_disorder(&disorder, spec.n_cells(), seed)?)?
                    }
                    _ => unreachable!("lattice configurations carry a size and a flux"),
                };
                let s = eigendecompose(&h)?;
                for (k, ev) in s.eigenvalues.iter().enumerate() {
                    t.push(vec![
                        num(lambda),
                        opt(flux.map(|f| f.p())),
                        opt(flux.map(|f| f.q())),
                        opt(size.map(|s| s[0])),
                        opt(size.map(|s| s[1])),
                        i.to_string(),
                        seed.to_string(),
                        k.to_string(),
                        num(*ev),
                    ]);
                }
            }
        }
    }
    let rows = t.rows.len();
    Ok(Outcome { tables: vec![t], seeds, summary: json!({ "eigenvalues": rows }), ..Outcome::default() })
}

fn connes(config: &RunConfig) -> Result<Outcome> {
    let c = &config.connes;
    let sums = connes_sums(&c.pairs, c.radius, c.orientation)?;
    let mut t = Table::new(
        "connes",
        &[
            "u1", "u2", "v1", "v2", "radius", "value_re", "value_im", "target_re", "target_im", "abs_error",
            "extrapolated_re", "extrapolated_im", "tail_estimate", "tolerance", "pass",
        ],
        5,
    );
    let mut out = Outcome::default();
    for s in &sums {
        let det = (s.u[0] * s.v[1] - s.u[1] * s.v[0]).abs() as f64;
        let tol = config.tolerances.connes_relative * 2.0 * std::f64::consts::PI * det.max(1.0);
        let pass = s.abs_error() <= tol;
        if !pass {
            out.warnings.push(format!("connes pair {:?},{:?} misses its target by {:.4}", s.u, s.v, s.abs_error()));
        }
        t.push(vec![
            s.u[0].to_string(),
            s.u[1].to_string(),
            s.v[0].to_string(),
            s.v[1].to_string(),
            num(s.radius),
            num(s.value.re),
            num(s.value.im),
            num(s.target.re),
            num(s.target.im),
            num(s.abs_error()),
            num(s.extrapolated.re),
            num(s.extrapolated.im),
            num(s.tail_estimate),
            num(tol),
            pass.to_string(),
        ]);
    }
    out.summary = json!({ "pairs": sums.len(), "passed": t.rows.iter().filter(|r| r[14] == "true").count() });
    out.tables.push(t);
    Ok(out)
}

fn band_edges(config: &RunConfig) -> Result<Outcome> {
    let Some(ModelConfig::Landau(spec)) = &config.model else {
        bail!("band-edges needs the landau model");
    };
    let mut lambdas = config.ensemble.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let level = config.ensemble.settings.edge_level;
    let d = &config.disorder;
    let curve = band_edge_curve(spec, level, &lambdas, d.m1, d.m2)?;
    let mut t = Table::new("band_edges", &["level", "lambda", "e_plus", "e_minus", "saturated_plus", "saturated_minus"], 2);
    for k in 0..lambdas.len() {
        t.push(vec![
            level.to_string(),
            num(lambdas[k]),
            num(curve.e_plus[k]),
            num(curve.e_minus[k]),
            curve.saturated_plus[k].to_string(),
            curve.saturated_minus[k].to_string(),
        ]);
    }
    let mut out = Outcome { summary: json!({ "monotone": curve.is_monotone() }), ..Outcome::default() };
    if !curve.is_monotone() {
        out.warnings.push("band edges are not monotone in λ".into());
    }
    out.tables.push(t);
    Ok(out)
}
