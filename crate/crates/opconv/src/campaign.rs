//! Seeded randomized campaigns over the verifier's checks.
//!
//! Every trial draws its instance from its own RNG, seeded by
//! `derive_seed(master, label, index)`. Trials run on the rayon pool and are
//! collected in index order, so a report never depends on scheduling.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use opconv_core::funcalc::{FunctionForm, ScalarFunctionSpec};
use opconv_core::means::MeanKind;
use opconv_core::outcome::CheckOutcome;
use opconv_core::posmaps::{MapDescriptor, PositiveMapSpec, TracialFunctional};
use opconv_core::random::{
    derive_seed, random_hermitian_with, random_invertible, random_pd_in, rng_from_seed, InstanceRng,
};
use opconv_core::verifier::{
    check_chain_implies_main, check_f_mean_inequality, check_geometric_path, check_harmonic_subadditivity,
    check_joint_convexity, check_lieb_convexity, check_main_convexity, check_mean_subadditivity,
    check_proof_chain, check_resolvent_derivatives, check_separate_convexity_two_var, check_trace_switch,
    counterexample_s, counterexample_t, ids, main_convexity_probe, FixedVariable,
};
use opconv_core::PositiveDefiniteMatrix;

use crate::catalog::{FFamily, GFamily, MapFamily};
use crate::config::{CampaignConfig, CatalogFilter};
use crate::error::AppResult;
use crate::report::{
    summarize, CampaignReport, Category, CheckSummary, CombinationSummary, ControlSummary, Tally, Timing,
    LIBRARY_VERSION, SCHEMA_VERSION,
};

pub const CONTROL_CUBE: &str = "control.cube_power";
pub const CONTROL_GEOMETRIC_PATH: &str = "control.geometric_path";

/// Eigenvalue range of `X` in the derivative and Lieb suites.
const SMOOTH_SPECTRUM: (f64, f64) = (0.1, 10.0);
/// Singular values of the Lieb suite's `K`.
const K_SINGULAR_VALUES: (f64, f64) = (0.1, 2.0);

/// Detail keys whose largest magnitude is kept in the report.
const TRACKED_DETAILS: [&str; 5] = [
    "relative_difference",
    "first.relative_error",
    "second.relative_error",
    "finite_difference.relative_error",
    "agreement.difference",
];

struct Trial {
    seed: u64,
    /// Ids the trial reports; errors are charged to all of them.
    ids: Vec<String>,
    result: Result<(String, Vec<CheckOutcome>), String>,
    combination: Option<usize>,
}

struct Ctx<'a> {
    master: u64,
    dims: &'a [usize],
    spectrum: (f64, f64),
    tol: f64,
    catalog: &'a CatalogFilter,
}

type Body<'a> = dyn Fn(usize, &mut InstanceRng) -> opconv_core::Result<(String, Vec<CheckOutcome>)> + Sync + 'a;

impl Ctx<'_> {
    fn dim(&self, index: usize) -> usize {
        self.dims[index % self.dims.len()]
    }

    fn pd(&self, dim: usize, rng: &mut InstanceRng) -> PositiveDefiniteMatrix {
        random_pd_in(dim, self.spectrum.0, self.spectrum.1, rng)
    }

    fn run(&self, label: &str, n: usize, ids: &(dyn Fn(usize) -> Vec<String> + Sync), body: &Body<'_>) -> Vec<Trial> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(self.master, label, i as u64);
                let mut rng = rng_from_seed(seed);
                let result = body(i, &mut rng)
                    .map(|(instance, outs)| (instance, outs.into_iter().map(|o| o.with_seed(seed)).collect()))
                    .map_err(|e| e.to_string());
                Trial {
                    seed,
                    ids: ids(i),
                    result,
                    combination: None,
                }
            })
            .collect()
    }
}

fn pick<T: Copy>(rng: &mut InstanceRng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// A map family whose outputs can be paired with those of `first`.
fn partner_family(first: MapFamily, catalog: &CatalogFilter, rng: &mut InstanceRng) -> MapFamily {
    if !first.preserves_dim() {
        return MapFamily::State;
    }
    let same: Vec<MapFamily> = catalog.maps.iter().copied().filter(|m| m.preserves_dim()).collect();
    pick(rng, &same)
}

fn sample_map(
    catalog: &CatalogFilter,
    dim: usize,
    rng: &mut InstanceRng,
) -> opconv_core::Result<(MapFamily, MapDescriptor, PositiveMapSpec)> {
    let family = pick(rng, &catalog.maps);
    let (desc, phi) = family.sample(dim, rng)?;
    Ok((family, desc, phi))
}

fn one(id: &str) -> impl Fn(usize) -> Vec<String> + Sync + '_ {
    move |_| vec![id.to_string()]
}

fn main_convexity_trials(ctx: &Ctx<'_>, trials: usize) -> (Vec<Trial>, Vec<(FFamily, GFamily, MapFamily)>) {
    let mut combos = Vec::new();
    for &f in &ctx.catalog.f {
        for &g in &ctx.catalog.g {
            for &m in &ctx.catalog.maps {
                combos.push((f, g, m));
            }
        }
    }
    let labels: Vec<String> = combos
        .iter()
        .map(|(f, g, m)| format!("{}/{}/{}/{}", ids::MAIN_CONVEXITY, f.name(), g.name(), m.name()))
        .collect();
    let ids_of = || {
        [
            ids::MAIN_CONVEXITY,
            ids::CHAIN_EQ1,
            ids::CHAIN_EQ2,
            ids::CHAIN_EQ3,
            ids::CHAIN_MEAN_ORDERING,
            ids::CHAIN_IMPLIES_MAIN,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
    };
    let trials = (0..combos.len() * trials)
        .into_par_iter()
        .map(|k| {
            let (c, i) = (k / trials, k % trials);
            let (ff, gf, mf) = combos[c];
            let seed = derive_seed(ctx.master, &labels[c], i as u64);
            let mut rng = rng_from_seed(seed);
            let dim = ctx.dim(i);
            let result = (|| {
                let f = ff.sample(&mut rng)?;
                let g = gf.sample(&mut rng)?;
                let (desc, phi) = mf.sample(dim, &mut rng)?;
                let x = ctx.pd(dim, &mut rng);
                let y = ctx.pd(dim, &mut rng);
                let main = check_main_convexity(&g, &f, &phi, &x, &y, ctx.tol)?;
                let chain = check_proof_chain(&g, &f, &phi, &x, &y, ctx.tol)?;
                let implies = check_chain_implies_main(&chain, &main, ctx.tol);
                let mut outs = vec![main];
                outs.extend(chain.links.iter().cloned());
                outs.push(chain.mean_ordering.clone());
                outs.push(implies);
                let instance = format!("dim={dim} f={} g={} map={}", f.render(), g.render(), desc.render());
                Ok::<_, opconv_core::Error>((
                    instance,
                    outs.into_iter().map(|o| o.with_seed(seed)).collect(),
                ))
            })()
            .map_err(|e| e.to_string());
            Trial {
                seed,
                ids: ids_of(),
                result,
                combination: Some(c),
            }
        })
        .collect();
    (trials, combos)
}

fn harmonic_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::HARMONIC_SUBADDITIVITY, n, &one(ids::HARMONIC_SUBADDITIVITY), &|i, rng| {
        let dim = ctx.dim(i);
        let (_, desc, phi) = sample_map(ctx.catalog, dim, rng)?;
        let x = ctx.pd(dim, rng);
        let y = ctx.pd(dim, rng);
        let o = check_harmonic_subadditivity(&phi, &x, &y, ctx.tol)?;
        Ok((format!("dim={dim} map={}", desc.render()), vec![o]))
    })
}

fn f_mean_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::F_MEAN_INEQUALITY, n, &one(ids::F_MEAN_INEQUALITY), &|i, rng| {
        let dim = ctx.dim(i);
        let f = pick(rng, &ctx.catalog.f).sample(rng)?;
        let x = ctx.pd(dim, rng);
        let y = ctx.pd(dim, rng);
        let o = check_f_mean_inequality(&f, &x, &y, ctx.tol)?;
        Ok((format!("dim={dim} f={}", f.render()), vec![o]))
    })
}

fn mean_id(i: usize) -> String {
    format!("{}.{}", ids::MEAN_SUBADDITIVITY, MeanKind::ALL[i % 3].name())
}

fn mean_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::MEAN_SUBADDITIVITY, n, &|i| vec![mean_id(i)], &|i, rng| {
        let dim = ctx.dim(i);
        let mean = MeanKind::ALL[i % 3];
        let (_, desc, phi) = sample_map(ctx.catalog, dim, rng)?;
        let x = ctx.pd(dim, rng);
        let y = ctx.pd(dim, rng);
        let o = check_mean_subadditivity(mean, &phi, &x, &y, ctx.tol)?;
        Ok((format!("dim={dim} mean={} map={}", mean.name(), desc.render()), vec![o]))
    })
}

fn separate_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::SEPARATE_CONVEXITY, n, &one(ids::SEPARATE_CONVEXITY), &|i, rng| {
        let dim = ctx.dim(i);
        let f1 = pick(rng, &ctx.catalog.f).sample(rng)?;
        let f2 = pick(rng, &ctx.catalog.f).sample(rng)?;
        let g = pick(rng, &ctx.catalog.g).sample(rng)?;
        let (family, phi_desc, phi) = sample_map(ctx.catalog, dim, rng)?;
        let (psi_desc, psi) = partner_family(family, ctx.catalog, rng).sample(dim, rng)?;
        let fixed = if i % 2 == 0 { FixedVariable::First } else { FixedVariable::Second };
        let anchor = ctx.pd(dim, rng);
        let p0 = ctx.pd(dim, rng);
        let p1 = ctx.pd(dim, rng);
        let o = check_separate_convexity_two_var(&f1, &f2, &g, &phi, &psi, fixed, &anchor, &p0, &p1, ctx.tol)?;
        let instance = format!(
            "dim={dim} fixed={fixed:?} f1={} f2={} g={} phi={} psi={}",
            f1.render(),
            f2.render(),
            g.render(),
            phi_desc.render(),
            psi_desc.render()
        );
        Ok((instance, vec![o]))
    })
}

fn trace_switch_functions() -> [ScalarFunctionSpec; 3] {
    [
        ScalarFunctionSpec::log(),
        ScalarFunctionSpec::power(0.5).expect("sqrt"),
        ScalarFunctionSpec::power(1.0).expect("identity"),
    ]
}

fn trace_switch_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    let hs = trace_switch_functions();
    ctx.run(ids::TRACE_SWITCH, n, &one(ids::TRACE_SWITCH), &|i, rng| {
        let dim = ctx.dim(i);
        let h = &hs[i % hs.len()];
        let p = ctx.pd(dim, rng);
        let q = ctx.pd(dim, rng);
        let o = check_trace_switch(&p, &q, h, ctx.tol)?;
        Ok((format!("dim={dim} h={}", h.render()), vec![o]))
    })
}

fn derivative_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::RESOLVENT_DERIVATIVES, n, &one(ids::RESOLVENT_DERIVATIVES), &|i, rng| {
        let dim = ctx.dim(i);
        let shift = rng.random_range(0.0..=2.0);
        let x = random_pd_in(dim, SMOOTH_SPECTRUM.0, SMOOTH_SPECTRUM.1, rng);
        let y = random_hermitian_with(dim, 1.0, rng);
        let o = check_resolvent_derivatives(shift, &x, &y, ctx.tol)?;
        Ok((format!("dim={dim} shift={shift}"), vec![o]))
    })
}

fn lieb_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::LIEB_CONVEXITY, n, &one(ids::LIEB_CONVEXITY), &|i, rng| {
        let dim = ctx.dim(i);
        let f1 = ScalarFunctionSpec::resolvent(rng.random_range(0.0..=2.0))?;
        let f2 = ScalarFunctionSpec::resolvent(rng.random_range(0.0..=2.0))?;
        let (_, desc, phi) = sample_map(ctx.catalog, dim, rng)?;
        let tau = TracialFunctional::new(rng.random_range(0.5..=2.0))?;
        let k = random_invertible(phi.out_dim(), K_SINGULAR_VALUES.0, K_SINGULAR_VALUES.1, rng);
        let x = random_pd_in(dim, SMOOTH_SPECTRUM.0, SMOOTH_SPECTRUM.1, rng);
        let y = random_hermitian_with(dim, 1.0, rng);
        let partner = random_pd_in(dim, SMOOTH_SPECTRUM.0, SMOOTH_SPECTRUM.1, rng);
        let o = check_lieb_convexity(&f1, &f2, &phi, &tau, &k, &x, &y, &partner, ctx.tol)?;
        let instance = format!(
            "dim={dim} f1={} f2={} map={} tau={}",
            f1.render(),
            f2.render(),
            desc.render(),
            tau.weight()
        );
        Ok((instance, vec![o]))
    })
}

fn joint_trials(ctx: &Ctx<'_>, n: usize) -> Vec<Trial> {
    ctx.run(ids::JOINT_CONVEXITY, n, &one(ids::JOINT_CONVEXITY), &|i, rng| {
        let dim = ctx.dim(i);
        let f1 = pick(rng, &ctx.catalog.f).sample(rng)?;
        let f2 = pick(rng, &ctx.catalog.f).sample(rng)?;
        let (family, phi_desc, phi) = sample_map(ctx.catalog, dim, rng)?;
        let (psi_desc, psi) = partner_family(family, ctx.catalog, rng).sample(dim, rng)?;
        let tau = TracialFunctional::new(rng.random_range(0.5..=2.0))?;
        let x1 = ctx.pd(dim, rng);
        let y1 = ctx.pd(dim, rng);
        let x2 = ctx.pd(dim, rng);
        let y2 = ctx.pd(dim, rng);
        let o = check_joint_convexity(&f1, &f2, &phi, &psi, &tau, (&x1, &y1), (&x2, &y2), ctx.tol)?;
        let instance = format!(
            "dim={dim} f1={} f2={} phi={} psi={} tau={}",
            f1.render(),
            f2.render(),
            phi_desc.render(),
            psi_desc.render(),
            tau.weight()
        );
        Ok((instance, vec![o]))
    })
}

/// `g = x^3`, which is not operator monotone, through the ungated main check.
fn cube_control_trials(ctx: &Ctx<'_>, n: usize) -> AppResult<Vec<Trial>> {
    let g = ScalarFunctionSpec::unclassified(FunctionForm::Power(3.0))?;
    let f = ScalarFunctionSpec::resolvent(0.0)?;
    let phi = PositiveMapSpec::identity(2);
    Ok(ctx.run(CONTROL_CUBE, n, &one(CONTROL_CUBE), &|_, rng| {
        let x = ctx.pd(2, rng);
        let y = ctx.pd(2, rng);
        let o = main_convexity_probe(&g, &f, &phi, &x, &y, ctx.tol)?.with_id(CONTROL_CUBE);
        Ok(("dim=2 f=resolvent:0 g=power:3 map=identity:2".to_string(), vec![o]))
    }))
}

fn geometric_path_control(tol: f64) -> AppResult<Vec<Trial>> {
    let g = ScalarFunctionSpec::power(0.5)?;
    let o = check_geometric_path(&g, &counterexample_s(), &counterexample_t(), tol)?.with_id(CONTROL_GEOMETRIC_PATH);
    Ok(vec![Trial {
        seed: 0,
        ids: vec![CONTROL_GEOMETRIC_PATH.to_string()],
        result: Ok(("g=power:0.5 on the fixed 2x2 pair".to_string(), vec![o])),
        combination: None,
    }])
}

#[derive(Default)]
struct Aggregate {
    checks: BTreeMap<String, (Tally, BTreeMap<String, f64>)>,
}

impl Aggregate {
    fn absorb(&mut self, trials: &[Trial]) {
        for t in trials {
            match &t.result {
                Ok((instance, outs)) => {
                    for o in outs {
                        let (tally, maxima) = self.checks.entry(o.check_id.clone()).or_default();
                        tally.record(o, instance);
                        for key in TRACKED_DETAILS {
                            if let Some(v) = o.details.get(key).filter(|v| v.is_finite()) {
                                let slot = maxima.entry(key.to_string()).or_insert(0.0);
                                *slot = slot.max(v.abs());
                            }
                        }
                    }
                }
                Err(message) => {
                    for id in &t.ids {
                        self.checks.entry(id.clone()).or_default().0.record_error(message, t.seed);
                    }
                }
            }
        }
    }
}

fn category(id: &str) -> Category {
    if id == ids::CHAIN_MEAN_ORDERING {
        Category::Diagnostic
    } else {
        Category::Theorem
    }
}

fn combination_summaries(trials: &[Trial], combos: &[(FFamily, GFamily, MapFamily)]) -> Vec<CombinationSummary> {
    let mut out: Vec<CombinationSummary> = combos
        .iter()
        .map(|(f, g, m)| CombinationSummary {
            f: f.name().to_string(),
            g: g.name().to_string(),
            map: m.name().to_string(),
            tally: Tally::default(),
            chain_link_fail: 0,
        })
        .collect();
    for t in trials {
        let c = &mut out[t.combination.expect("main trials carry a combination")];
        match &t.result {
            Ok((instance, outs)) => {
                for o in outs {
                    if o.check_id == ids::MAIN_CONVEXITY {
                        c.tally.record(o, instance);
                    }
                }
                let links = [ids::CHAIN_EQ1, ids::CHAIN_EQ2, ids::CHAIN_EQ3];
                if outs.iter().any(|o| links.contains(&o.check_id.as_str()) && o.is_fail()) {
                    c.chain_link_fail += 1;
                }
            }
            Err(message) => c.tally.record_error(message, t.seed),
        }
    }
    out
}

/// Runs the selected suites plus both negative controls.
pub fn run_campaign(config: &CampaignConfig) -> AppResult<CampaignReport> {
    config.validate()?;
    let started = Instant::now();
    let ctx = Ctx {
        master: config.seed,
        dims: &config.dims,
        spectrum: config.spectrum(),
        tol: config.effective_tolerance(),
        catalog: &config.catalog,
    };
    let n = config.trials_per_check;
    let mut timing = Timing::default();
    let mut agg = Aggregate::default();
    let mut combinations = Vec::new();

    type Runner = fn(&Ctx<'_>, usize) -> Vec<Trial>;
    let suites: [(&str, Runner); 8] = [
        (ids::HARMONIC_SUBADDITIVITY, harmonic_trials),
        (ids::F_MEAN_INEQUALITY, f_mean_trials),
        (ids::MEAN_SUBADDITIVITY, mean_trials),
        (ids::SEPARATE_CONVEXITY, separate_trials),
        (ids::TRACE_SWITCH, trace_switch_trials),
        (ids::RESOLVENT_DERIVATIVES, derivative_trials),
        (ids::LIEB_CONVEXITY, lieb_trials),
        (ids::JOINT_CONVEXITY, joint_trials),
    ];
    if config.selects(ids::MAIN_CONVEXITY) {
        let t0 = Instant::now();
        let (trials, combos) = main_convexity_trials(&ctx, n);
        agg.absorb(&trials);
        combinations = combination_summaries(&trials, &combos);
        timing.suite_seconds.insert(ids::MAIN_CONVEXITY.into(), t0.elapsed().as_secs_f64());
    }
    for (name, runner) in suites {
        if config.selects(name) {
            let t0 = Instant::now();
            agg.absorb(&runner(&ctx, n));
            timing.suite_seconds.insert(name.into(), t0.elapsed().as_secs_f64());
        }
    }

    let t0 = Instant::now();
    let mut controls = Aggregate::default();
    controls.absorb(&cube_control_trials(&ctx, config.control_trials)?);
    controls.absorb(&geometric_path_control(ctx.tol)?);
    timing.suite_seconds.insert("negative_controls".into(), t0.elapsed().as_secs_f64());
    let negative_controls: Vec<ControlSummary> = controls
        .checks
        .into_iter()
        .map(|(id, (tally, _))| ControlSummary {
            control_id: id,
            detected: tally.fail > 0,
            tally,
        })
        .collect();

    let checks: Vec<CheckSummary> = agg
        .checks
        .into_iter()
        .map(|(id, (tally, detail_max))| CheckSummary {
            category: category(&id),
            check_id: id,
            tally,
            detail_max,
        })
        .collect();
    let summary = summarize(&checks, &negative_controls);
    timing.wall_seconds = started.elapsed().as_secs_f64();
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION.to_string(),
        library_version: LIBRARY_VERSION.to_string(),
        config: config.clone(),
        checks,
        combinations,
        negative_controls,
        summary,
        timing,
    })
}
