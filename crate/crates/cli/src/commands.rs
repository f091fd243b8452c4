//! The five subcommands. Each builds a [`Table`]; grid points are evaluated
//! in parallel and emitted in input order.

use num_bigint::BigUint;
use rayon::prelude::*;

use ruelle_bf_core::bf_engine::{feynman_rules, field, gauge_fixed_ratio};
use ruelle_bf_core::flat_zeta::{alternating_minor_sum, complex_of};
use ruelle_bf_core::linalg::eigenvalues;
use ruelle_bf_core::orbits::prime_orbit_counts;
use ruelle_bf_core::{
    alternating_assembly, anosov_check, closed_form_expectation, enumerate_connected_quadratic,
    enumerate_prime_orbits, euler_product_log_zeta, expectation_value, fixed_point_count, gamma_int,
    gamma_tr, graph_weight, load_length_spectrum, log_zeta_k, regularized_propagator, toy_bf_partition,
    zeta_expectation_bridge, CMatrix, CVector, Cx, Error, HyperbolicToralModel, MatrixBFModel, PrimeOrbit,
};

use crate::config::{matrix, ModelSpec, RunConfig};
use crate::emit::{format_float, Cell, Table};
use crate::CliError;

/// A table plus an optional failure to report after it has been written.
pub type Outcome = Result<(Table, Option<CliError>), CliError>;

const DEFAULT_N_MAX: u32 = 12;
const DEFAULT_BASE_POINT: f64 = 3.0;
const ACYCLICITY_NOTE: &str =
    "acyclicity of the twisted complex and the contact property are assumed, not checked";

pub fn core_error(e: Error) -> CliError {
    match e {
        Error::NonConvergent { .. } | Error::IrDivergence { .. } | Error::OutsideRadius { .. } | Error::BranchCut { .. } => {
            CliError::NonConvergent(e.to_string())
        }
        Error::InvalidArgument(_) | Error::Unsupported(_) | Error::Io(_) => CliError::Config(e.to_string()),
        _ => CliError::Model(e.to_string()),
    }
}

struct OrbitModel {
    orbits: Vec<PrimeOrbit<f64>>,
    m: usize,
    l_max: f64,
    cat: Option<(HyperbolicToralModel<f64>, u32)>,
}

fn orbit_model(cfg: &RunConfig) -> Result<OrbitModel, CliError> {
    match &cfg.model {
        ModelSpec::Catmap(c) => {
            let model = HyperbolicToralModel::new(c.a.rows(), c.roof, cfg.rep.representation()).map_err(core_error)?;
            if !anosov_check(&model).anosov {
                return Err(CliError::Model(format!("{:?} is not hyperbolic: eigenvalue on the unit circle", c.a.rows())));
            }
            let n_max = match (cfg.truncation.n_max, cfg.truncation.l_max) {
                (Some(n), _) => n,
                (None, Some(l)) => (l / c.roof - 1e-12).ceil().max(1.0) as u32,
                (None, None) => DEFAULT_N_MAX,
            };
            let l_max = cfg.truncation.l_max.unwrap_or(f64::from(n_max) * c.roof);
            let orbits = enumerate_prime_orbits(&model, n_max).map_err(core_error)?;
            Ok(OrbitModel { orbits, m: 1, l_max, cat: Some((model, n_max)) })
        }
        ModelSpec::SpectrumFile(path) => {
            let orbits: Vec<PrimeOrbit<f64>> = load_length_spectrum(path).map_err(|e| match e {
                Error::Io(msg) => CliError::Config(format!("config field `model.spectrum_file`: {msg}")),
                other => CliError::Model(format!("{}: {other}", path.display())),
            })?;
            let m = orbits.first().map_or(1, PrimeOrbit::m);
            if orbits.iter().any(|o| o.m() != m) {
                return Err(CliError::Model("spectrum mixes transverse dimensions".into()));
            }
            let longest = orbits.iter().map(|o| o.length).fold(0.0, f64::max);
            let l_max = cfg.truncation.l_max.unwrap_or(longest);
            Ok(OrbitModel { orbits, m, l_max, cat: None })
        }
        ModelSpec::Matrix(_) => Err(CliError::Config("config field `model`: this command needs catmap or spectrum_file".into())),
    }
}

pub fn matrix_model(cfg: &RunConfig) -> Result<MatrixBFModel<f64>, CliError> {
    let ModelSpec::Matrix(spec) = &cfg.model else {
        return Err(CliError::Config("config field `model`: this command needs a matrix model".into()));
    };
    let mut blocks = Vec::new();
    for (i, b) in spec.blocks.iter().enumerate() {
        let at = |name: &str| format!("model.matrix.blocks[{i}].{name}");
        match (&b.l, &b.d, &b.iota) {
            (Some(l), _, _) => {
                let l = matrix(l, &at("L"))?;
                let n = l.nrows();
                blocks.push((b.degree, l, CMatrix::identity(n, n)));
            }
            (None, Some(d), Some(iota)) => {
                let d = matrix(d, &at("d"))?;
                let iota = matrix(iota, &at("iota"))?;
                if d.shape() != iota.shape() {
                    return Err(CliError::Config(format!("config field `{}`: shape differs from d", at("iota"))));
                }
                blocks.push((b.degree, d, iota));
            }
            _ => unreachable!("validated"),
        }
    }
    MatrixBFModel::from_blocks(blocks, cfg.k()).map_err(core_error)
}

fn grid(cfg: &RunConfig, what: &str) -> Result<Vec<Cx<f64>>, CliError> {
    if cfg.grid.is_empty() {
        return Err(CliError::Config(format!("config field `grid`: needs at least one {what} value")));
    }
    Ok(cfg.grid.iter().map(|z| z.value()).collect())
}

pub fn orbits(cfg: &RunConfig) -> Outcome {
    let model = orbit_model(cfg)?;
    let mut t = Table::new(&["period", "length", "multiplicity", "P_entries", "trace_P", "det_I_minus_P", "rho_re", "rho_im"]);
    for o in &model.orbits {
        let entries: Vec<String> = o.poincare.transpose().iter().map(|&x| format_float(x)).collect();
        let det = alternating_minor_sum(&complex_of(&o.poincare)).map_err(core_error)?;
        let rho = o.rho[(0, 0)];
        t.push(vec![
            o.period.map_or(Cell::Null, |p| Cell::Int(p.into())),
            o.length.into(),
            Cell::Int(o.multiplicity.into()),
            entries.join(";").into(),
            o.poincare.trace().into(),
            det.re.into(),
            rho.re.into(),
            rho.im.into(),
        ]);
    }
    t.meta.push(("model_id", cfg.model_id().into()));
    t.meta.push(("orbit_groups", Cell::Int(model.orbits.len() as i128)));
    if let Some((cat, n_max)) = &model.cat {
        let primes = prime_orbit_counts(cat, *n_max).map_err(core_error)?;
        let mut consistent = true;
        for n in 1..=*n_max {
            let sieve = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| primes[d as usize - 1].clone() * d)
                .sum::<BigUint>();
            consistent &= sieve == fixed_point_count(cat, n).map_err(core_error)?;
        }
        t.meta.push(("sieve_checked_up_to", Cell::Int((*n_max).into())));
        t.meta.push(("sieve_consistent", consistent.into()));
        t.meta.push(("fixed_points_at_n_max", Cell::Big(fixed_point_count(cat, *n_max).map_err(core_error)?.to_string())));
        if !consistent {
            return Ok((t, Some(CliError::Model("sieve inconsistency in orbit counts".into()))));
        }
    }
    t.notes.push(ACYCLICITY_NOTE.into());
    Ok((t, None))
}

pub fn zeta(cfg: &RunConfig) -> Outcome {
    let model = orbit_model(cfg)?;
    let lambdas = grid(cfg, "λ")?;
    let per_point: Vec<Result<(Vec<Vec<Cell>>, bool), CliError>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let euler = euler_product_log_zeta(&model.orbits, lambda, model.l_max).map_err(core_error)?;
            let assembly = alternating_assembly(&model.orbits, model.m, lambda, model.l_max).map_err(core_error)?;
            let defect = (euler.value - assembly.value).norm();
            let row = |k: Cell, v: Cx<f64>, tail: f64, converged: bool| {
                vec![lambda.re.into(), lambda.im.into(), k, v.re.into(), v.im.into(), tail.into(), model.l_max.into(), defect.into(), converged.into()]
            };
            let mut rows = Vec::new();
            for k in 0..=2 * model.m {
                let z = log_zeta_k(&model.orbits, k, lambda, model.l_max).map_err(core_error)?;
                rows.push(row(Cell::Int(k as i128), z.value, z.tail_bound, z.converged));
            }
            rows.push(row("euler".into(), euler.value, euler.tail_bound, euler.converged));
            rows.push(row("assembly".into(), assembly.value, assembly.tail_bound, assembly.converged));
            Ok((rows, euler.converged))
        })
        .collect();
    let mut t = Table::new(&["re_lambda", "im_lambda", "k", "re_logzeta", "im_logzeta", "tail_bound", "L_max", "defect", "converged"]);
    let mut any_converged = false;
    for r in per_point {
        let (rows, converged) = r?;
        any_converged |= converged;
        rows.into_iter().for_each(|row| t.push(row));
    }
    t.meta.push(("model_id", cfg.model_id().into()));
    t.meta.push(("m", Cell::Int(model.m as i128)));
    t.notes.push(ACYCLICITY_NOTE.into());
    let status = (!any_converged && !model.orbits.is_empty())
        .then(|| CliError::NonConvergent("orbit sums diverge at every grid point; move Re λ to the right".into()));
    Ok((t, status))
}

pub fn bridge(cfg: &RunConfig) -> Outcome {
    let hbars = grid(cfg, "ħ")?;
    let id = cfg.model_id();
    if let ModelSpec::Matrix(_) = cfg.model {
        let model = matrix_model(cfg)?;
        let k = model.hbar_order();
        let rows: Vec<Result<Vec<Cell>, CliError>> = hbars
            .par_iter()
            .map(|&hbar| {
                let closed = closed_form_expectation(&model, hbar).map_err(core_error)?;
                let partition = gauge_fixed_ratio(&model, hbar).map_err(core_error)?;
                let (series, bound, outside) = match expectation_value(&model, hbar) {
                    Ok(r) => (Some(r.series_value), Some(r.truncation_bound), false),
                    Err(Error::OutsideRadius { .. }) => (None, None, true),
                    Err(e) => return Err(core_error(e)),
                };
                Ok(vec![
                    id.clone().into(),
                    hbar.re.into(),
                    hbar.im.into(),
                    Cell::Int(k as i128),
                    series.map(|s| s.re).into(),
                    series.map(|s| s.im).into(),
                    closed.re.into(),
                    closed.im.into(),
                    partition.into(),
                    series.map(|s| (s - closed).norm()).into(),
                    (partition - closed.norm()).abs().into(),
                    bound.into(),
                    outside.into(),
                ])
            })
            .collect();
        let mut t = Table::new(&[
            "model_id",
            "hbar_re",
            "hbar_im",
            "K",
            "series_re",
            "series_im",
            "determinant_re",
            "determinant_im",
            "partition_modulus",
            "defect_series_determinant",
            "defect_partition_determinant",
            "truncation_bound",
            "outside_radius",
        ]);
        for r in rows {
            t.push(r?);
        }
        t.meta.push(("radius", model.spectral_radius_of_convergence().map_err(core_error)?.into()));
        return Ok((t, None));
    }
    let model = orbit_model(cfg)?;
    let base = cfg.base_point.map_or(Cx::new(DEFAULT_BASE_POINT, 0.0), |z| z.value());
    let rows: Vec<Result<Vec<Cell>, CliError>> = hbars
        .par_iter()
        .map(|&hbar| {
            let r = zeta_expectation_bridge(&model.orbits, model.m, hbar, base, model.l_max).map_err(core_error)?;
            Ok(vec![
                id.clone().into(),
                hbar.re.into(),
                hbar.im.into(),
                model.l_max.into(),
                base.re.into(),
                base.im.into(),
                r.orbit_route.re.into(),
                r.orbit_route.im.into(),
                r.det_route.re.into(),
                r.det_route.im.into(),
                r.defect.into(),
                r.tail_bound.into(),
                r.converged.into(),
            ])
        })
        .collect();
    let mut t = Table::new(&[
        "model_id",
        "hbar_re",
        "hbar_im",
        "L_max",
        "base_re",
        "base_im",
        "orbit_re",
        "orbit_im",
        "determinant_re",
        "determinant_im",
        "defect_orbit_determinant",
        "tail_bound",
        "converged",
    ]);
    for r in rows {
        t.push(r?);
    }
    t.notes.push(ACYCLICITY_NOTE.into());
    Ok((t, None))
}

fn field_vectors(cfg: &RunConfig, n: usize) -> Result<(CVector<f64>, CVector<f64>), CliError> {
    let Some(f) = &cfg.fields else {
        let ones = CVector::from_element(n, Cx::new(1.0, 0.0));
        return Ok((ones.clone(), ones));
    };
    let vec = |v: &[crate::config::Complex], name: &str| {
        if v.len() != n {
            return Err(CliError::Config(format!("config field `fields.{name}`: expected {n} entries, got {}", v.len())));
        }
        Ok(CVector::from_iterator(n, v.iter().map(|z| z.value())))
    };
    Ok((vec(&f.a, "A")?, vec(&f.b, "B")?))
}

pub fn diagrams(cfg: &RunConfig) -> Outcome {
    let k = cfg.k();
    let model = match cfg.model {
        ModelSpec::Matrix(_) => Some(matrix_model(cfg)?),
        _ => None,
    };
    let lambda = cfg.grid.first().map_or(Cx::new(0.0, 0.0), |z| z.value());
    let mut t = Table::new(&[
        "graph",
        "n_vertices",
        "loops",
        "hbar_power",
        "automorphisms",
        "re_weight",
        "im_weight",
        "re_closed_form",
        "im_closed_form",
        "defect",
    ]);
    let evaluated = match &model {
        Some(m) => {
            let prop = regularized_propagator(m, 0.0, None, lambda).map_err(core_error)?;
            let rules = feynman_rules(m, &prop, true).map_err(core_error)?;
            let (a, b) = field_vectors(cfg, m.dim())?;
            let chains = gamma_int(m, &prop, &a, &b, k).map_err(core_error)?;
            let loops = gamma_tr(m, lambda, k).map_err(core_error)?;
            Some((rules, field(&a, &b), chains, loops))
        }
        None => None,
    };
    for n in 1..=k {
        for g in enumerate_connected_quadratic(n).map_err(core_error)? {
            let loops = g.loop_number();
            let aut = g.automorphism_order();
            let power = ruelle_bf_core::feynman::hbar_exponent(&g);
            let (w, cf) = match &evaluated {
                Some((rules, x, chains, cycles)) => {
                    let ext = if loops == 0 { vec![x.clone()] } else { Vec::new() };
                    let w = graph_weight(&g, rules, &ext).map_err(core_error)? / aut as f64;
                    let cf = if loops == 0 { chains.coeff(n) } else { cycles.coeff(power) };
                    (Some(w), Some(cf))
                }
                None => (None, None),
            };
            t.push(vec![
                if loops == 0 { "chain" } else { "cycle" }.into(),
                Cell::Int(n as i128),
                Cell::Int(loops as i128),
                Cell::Int(power as i128),
                Cell::Int(aut.into()),
                w.map(|z| z.re).into(),
                w.map(|z| z.im).into(),
                cf.map(|z| z.re).into(),
                cf.map(|z| z.im).into(),
                w.zip(cf).map(|(a, b)| (a - b).norm()).into(),
            ]);
        }
    }
    t.meta.push(("model_id", cfg.model_id().into()));
    t.meta.push(("K", Cell::Int(k as i128)));
    if model.is_some() {
        t.meta.push(("re_lambda", lambda.re.into()));
        t.meta.push(("im_lambda", lambda.im.into()));
    }
    Ok((t, None))
}

pub fn partition(cfg: &RunConfig) -> Outcome {
    let model = matrix_model(cfg)?;
    let hbars = grid(cfg, "ħ")?;
    let complex = model.complex();
    let rows: Vec<Result<Vec<Cell>, CliError>> = hbars
        .par_iter()
        .map(|&hbar| {
            let v = toy_bf_partition(complex, hbar).map_err(core_error)?;
            let rel = (v.gauge_fixed - v.direct).abs() / v.direct.max(f64::MIN_POSITIVE);
            Ok(vec![hbar.re.into(), hbar.im.into(), v.gauge_fixed.into(), v.direct.into(), rel.into(), v.resonance.into()])
        })
        .collect();
    let mut t = Table::new(&["hbar_re", "hbar_im", "gauge_fixed", "direct", "relative_defect", "resonance"]);
    for r in rows {
        t.push(r?);
    }
    let mut zeros = complex.critical_locus().map_err(core_error)?;
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut targets: Vec<Cx<f64>> = eigenvalues(complex.l0()).map_err(core_error)?.into_iter().map(|z| -z).collect();
    let mut distance = 0.0f64;
    for z in &zeros {
        if let Some((i, d)) = targets.iter().enumerate().map(|(i, t)| (i, (z - t).norm())).min_by(|a, b| a.1.total_cmp(&b.1)) {
            distance = distance.max(d);
            targets.swap_remove(i);
        }
    }
    let listed: Vec<String> = zeros.iter().map(|z| format!("[{},{}]", format_float(z.re), format_float(z.im))).collect();
    t.meta.push(("model_id", cfg.model_id().into()));
    t.meta.push(("critical_locus", listed.join(";").into()));
    t.meta.push(("locus_vs_minus_spectrum", distance.into()));
    Ok((t, None))
}
