//! The experiment drivers behind `faberdyn run`. Each one builds its model,
//! propagates with a precomputed coefficient table, streams observables into
//! CSV artifacts, and finishes by writing the run manifest.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use faberdyn::faber::{
    ellipse_from_bounds, faber_coefficients_bessel, faber_coefficients_contour,
    FaberCoefficients, BOUNDS_INFLATION,
};
use faberdyn::gaussian::{
    current_profile, density_profile, entropy_profile, source_term, GaussianState,
};
use faberdyn::manybody::{estimate_tau_star, neel_word, time_averaged_profile, ManyBodyState};
use faberdyn::operators::{
    build_hn_single_particle, build_model_a_jumps, build_model_b_jumps, build_xxz_full,
    build_xxz_nonreciprocal, hn_spectral_bounds, xxz_spectral_bounds, Boundary, ModelParams,
    SectorBasis, SparseOperator,
};
use faberdyn::oracles::{dense_eigenvalues, fit_front_velocity, front_position, hn_obc_spectrum,
    hn_pbc_spectrum, GhdPrediction};
use faberdyn::trajectories::{
    conditional_entropy_average, ensemble_average, run_ensemble, standard_spin_observer,
    write_records_jsonl, JumpModel, TrajectoryConfig,
};

use crate::config::{normalized_boundary, CliError, CliResult, NpPolicy, Resolved};
use crate::output::RunDir;

/// Runs the experiment named in the resolved configuration.
pub fn run(r: &Resolved) -> CliResult<()> {
    match r.experiment.as_str() {
        "benchmark_cdw" => run_gaussian_spacetime(r, GaussianState::init_cdw(r.n_sites)?),
        "hn_domain_wall" => run_gaussian_spacetime(r, GaussianState::init_domain_wall(r.n_sites)?),
        "ghd_compare" => run_ghd_compare(r),
        "interacting_neel" => run_sector(r, SectorInitial::Neel),
        "interacting_dw" => run_sector(r, SectorInitial::DomainWall),
        "model_a_traj" => run_trajectories(r, UnravellingKind::BoundaryAndBond),
        "model_b_traj" => run_trajectories(r, UnravellingKind::BondTransport),
        "spectra" => run_spectra(r),
        other => Err(CliError::Config(format!("unknown experiment `{other}`"))),
    }
}

fn params_of(r: &Resolved) -> CliResult<ModelParams> {
    let boundary = normalized_boundary(&r.boundary)
        .ok_or_else(|| CliError::Config(format!("unknown boundary `{}`", r.boundary)))?;
    Ok(ModelParams {
        n_sites: r.n_sites,
        j: r.j,
        gamma: r.gamma,
        delta: r.delta,
        boundary,
    })
}

/// Coefficient table for one step of `dt` under the configured order policy.
fn table_for(
    r: &Resolved,
    bounds: faberdyn::faber::SpectralBounds,
) -> CliResult<FaberCoefficients> {
    let ellipse = ellipse_from_bounds(&bounds.inflated(BOUNDS_INFLATION))?;
    let table = match r.np {
        NpPolicy::Threshold { threshold } => faber_coefficients_bessel(&ellipse, r.dt, threshold)?,
        NpPolicy::Fixed { order } => faber_coefficients_contour(&ellipse, r.dt, order)?,
    };
    Ok(table)
}

fn step_count(r: &Resolved) -> CliResult<usize> {
    let n = (r.t_final / r.dt).round() as usize;
    if n == 0 {
        return Err(CliError::Config(format!(
            "t_final = {} and dt = {} give no steps",
            r.t_final, r.dt
        )));
    }
    Ok(n)
}

// ─────────────────────────────────────────────────────────────────────────────
// Free-fermion space-time profiles (CDW quench and domain-wall melting)
// ─────────────────────────────────────────────────────────────────────────────

fn run_gaussian_spacetime(r: &Resolved, mut state: GaussianState) -> CliResult<()> {
    let params = params_of(r)?;
    let op = build_hn_single_particle(&params)?;
    let table = table_for(r, hn_spectral_bounds(&params)?)?;
    let n_steps = step_count(r)?;

    let mut dir = RunDir::create(r)?;
    let mut density = dir.csv("density.csv", "t,site,density");
    let mut current = dir.csv("current.csv", "t,bond,current");
    let mut source = dir.csv("source.csv", "t,site,source");
    let mut entropy = dir.csv("entropy.csv", "t,cut,entropy");

    let mut emit = |t: f64, state: &GaussianState| -> CliResult<()> {
        let c = state.correlation_matrix()?;
        for (site, v) in density_profile(&c).iter().enumerate() {
            density.row(&[&t, &site, v]);
        }
        for (bond, v) in current_profile(&c, &params).iter().enumerate() {
            current.row(&[&t, &bond, v]);
        }
        for (site, v) in source_term(&c, &params).iter().enumerate() {
            source.row(&[&t, &site, v]);
        }
        for (i, v) in entropy_profile(&c)?.iter().enumerate() {
            entropy.row(&[&t, &(i + 1), v]);
        }
        Ok(())
    };

    emit(0.0, &state)?;
    for k in 1..=n_steps {
        state.evolve_step(&op, &table, true)?;
        if k % r.snapshot_every == 0 || k == n_steps {
            emit(k as f64 * r.dt, &state)?;
        }
    }

    let c = state.correlation_matrix()?;
    let final_density = density_profile(&c);
    dir.record("final_density_left_edge", final_density[0]);
    dir.record("final_density_right_edge", final_density[r.n_sites - 1]);
    dir.record("table_order", table.order());

    dir.finish_csv(density)?;
    dir.finish_csv(current)?;
    dir.finish_csv(source)?;
    dir.finish_csv(entropy)?;
    dir.write_manifest(r, &vec![table.order(); n_steps])
}

// ─────────────────────────────────────────────────────────────────────────────
// Domain-wall melting versus ballistic hydrodynamics
// ─────────────────────────────────────────────────────────────────────────────

fn run_ghd_compare(r: &Resolved) -> CliResult<()> {
    let params = params_of(r)?;
    let ghd = GhdPrediction::new(&params)
        .map_err(|e| CliError::Config(format!("hydrodynamic comparison: {e}")))?;
    let op = build_hn_single_particle(&params)?;
    let table = table_for(r, hn_spectral_bounds(&params)?)?;
    let n_steps = step_count(r)?;
    let t_final = n_steps as f64 * r.dt;

    let mut state = GaussianState::init_domain_wall(r.n_sites)?;
    // Offset of a lattice position from the initial wall, which sits between
    // sites L/2 - 1 and L/2.
    let wall = r.n_sites as f64 / 2.0 - 0.5;
    const FRONT_LEVEL: f64 = 0.05;

    let mut dir = RunDir::create(r)?;
    let mut front = dir.csv("front.csv", "t,position");
    let mut tracked: Vec<(f64, f64)> = Vec::new();

    for k in 1..=n_steps {
        state.evolve_step(&op, &table, true)?;
        if k % r.snapshot_every == 0 || k == n_steps {
            let t = k as f64 * r.dt;
            let c = state.correlation_matrix()?;
            if let Some(pos) = front_position(&density_profile(&c), wall, FRONT_LEVEL) {
                front.row(&[&t, &pos]);
                tracked.push((t, pos));
            }
        }
    }

    // Fit the front velocity on the late half of the tracked positions, where
    // the contour has outrun the initial wall width.
    let late: Vec<(f64, f64)> = tracked
        .iter()
        .copied()
        .filter(|(t, _)| *t >= t_final / 2.0)
        .collect();
    if late.len() >= 2 {
        let (ts, xs): (Vec<f64>, Vec<f64>) = late.into_iter().unzip();
        let v = fit_front_velocity(&ts, &xs, FRONT_LEVEL)?;
        dir.record("v_eff_fitted", v);
    }
    dir.record("v_eff_predicted", params.j - params.gamma);

    // Site-by-site comparison at the final time, inside and outside the cone.
    let c = state.correlation_matrix()?;
    let sim_density = density_profile(&c);
    let sim_current = current_profile(&c, &params);
    let sim_entropy = entropy_profile(&c)?;

    let mut density = dir.csv("comparison_density.csv", "site,x,xi,sim,ghd");
    let mut current = dir.csv("comparison_current.csv", "bond,x,xi,sim,ghd");
    let mut entropy = dir.csv("comparison_entropy.csv", "cut,x,xi,sim,ghd");
    let cone = ghd.v_eff * t_final;
    let mut worst = [0.0f64; 3];

    for (site, v) in sim_density.iter().enumerate() {
        let x = site as f64 - wall;
        let xi = x / cone;
        let pred = ghd.density(x, t_final);
        density.row(&[&site, &x, &xi, v, &pred]);
        if xi.abs() <= 0.9 {
            worst[0] = worst[0].max((v - pred).abs());
        }
    }
    for (bond, v) in sim_current.iter().enumerate() {
        let x = bond as f64 + 0.5 - wall;
        let xi = x / cone;
        let pred = ghd.current(x, t_final);
        current.row(&[&bond, &x, &xi, v, &pred]);
        if xi.abs() <= 0.9 {
            worst[1] = worst[1].max((v - pred).abs());
        }
    }
    for (i, v) in sim_entropy.iter().enumerate() {
        let cut = i + 1;
        let x = cut as f64 - 0.5 - wall;
        let xi = x / cone;
        let pred = ghd.entropy(x, t_final);
        entropy.row(&[&cut, &x, &xi, v, &pred]);
        if xi.abs() <= 0.9 && pred.is_finite() {
            worst[2] = worst[2].max((v - pred).abs());
        }
    }
    dir.record("max_density_error_inner_cone", worst[0]);
    dir.record("max_current_error_inner_cone", worst[1]);
    dir.record("max_entropy_error_inner_cone", worst[2]);
    dir.record("table_order", table.order());

    dir.finish_csv(front)?;
    dir.finish_csv(density)?;
    dir.finish_csv(current)?;
    dir.finish_csv(entropy)?;
    dir.write_manifest(r, &vec![table.order(); n_steps])
}

// ─────────────────────────────────────────────────────────────────────────────
// Interacting chains in a magnetization sector
// ─────────────────────────────────────────────────────────────────────────────

enum SectorInitial {
    Neel,
    DomainWall,
}

fn run_sector(r: &Resolved, initial: SectorInitial) -> CliResult<()> {
    let params = params_of(r)?;
    let n_up = match initial {
        SectorInitial::Neel => neel_word(r.n_sites).count_ones() as usize,
        SectorInitial::DomainWall => r.n_sites / 2,
    };
    let basis = Arc::new(SectorBasis::new(r.n_sites, n_up)?);
    let op = build_xxz_nonreciprocal(&params, &basis)?;
    let table = table_for(r, xxz_spectral_bounds(&params)?)?;
    let n_steps = step_count(r)?;

    let mut state = match initial {
        SectorInitial::Neel => ManyBodyState::neel_state(basis.clone())?,
        SectorInitial::DomainWall => ManyBodyState::dw_state(basis.clone())?,
    };

    let mut dir = RunDir::create(r)?;
    let mut magnetization = dir.csv("magnetization.csv", "t,site,magnetization");
    let mut current = dir.csv("spin_current.csv", "t,bond,current");
    let mut entropy = dir.csv("entropy.csv", "t,cut,entropy");

    let mut times = Vec::new();
    let mut profiles: Vec<Vec<f64>> = Vec::new();
    let mut max_norm_change = 0.0f64;

    let mut emit = |t: f64,
                    state: &ManyBodyState,
                    times: &mut Vec<f64>,
                    profiles: &mut Vec<Vec<f64>>|
     -> CliResult<()> {
        let m = state.magnetization_profile();
        for (site, v) in m.iter().enumerate() {
            magnetization.row(&[&t, &site, v]);
        }
        for (bond, v) in state.spin_current_profile(params.j).iter().enumerate() {
            current.row(&[&t, &bond, v]);
        }
        for cut in 1..r.n_sites {
            entropy.row(&[&t, &cut, &state.bipartite_entropy(cut)?]);
        }
        times.push(t);
        profiles.push(m);
        Ok(())
    };

    emit(0.0, &state, &mut times, &mut profiles)?;
    for k in 1..=n_steps {
        let pre_norm = state.evolve_step(&op, &table)?;
        max_norm_change = max_norm_change.max((pre_norm - 1.0).abs());
        if k % r.snapshot_every == 0 || k == n_steps {
            emit(k as f64 * r.dt, &state, &mut times, &mut profiles)?;
        }
    }

    // Settling time of the boundary-site magnetization, then the late-time
    // averaged profile over everything past it.
    let boundary_series: Vec<f64> = profiles.iter().map(|p| p[0]).collect();
    match estimate_tau_star(&times, &boundary_series) {
        Some(tau_star) => {
            dir.record("tau_star", tau_star);
            let averaged = time_averaged_profile(&times, &profiles, tau_star)?;
            let mut profile = dir.csv("profile_infinity.csv", "site,magnetization");
            for (site, v) in averaged.iter().enumerate() {
                profile.row(&[&site, v]);
            }
            dir.finish_csv(profile)?;
        }
        None => dir.record("tau_star", serde_json::Value::Null),
    }
    dir.record("max_step_norm_change", max_norm_change);
    dir.record("sector_dimension", basis.dim());
    dir.record("table_order", table.order());

    dir.finish_csv(magnetization)?;
    dir.finish_csv(current)?;
    dir.finish_csv(entropy)?;
    dir.write_manifest(r, &vec![table.order(); n_steps])
}

// ─────────────────────────────────────────────────────────────────────────────
// Quantum-jump ensembles on the full spin space
// ─────────────────────────────────────────────────────────────────────────────

enum UnravellingKind {
    /// Boundary and bond lowering channels (loses magnetization).
    BoundaryAndBond,
    /// Excitation-transport bond channels (conserves magnetization).
    BondTransport,
}

fn run_trajectories(r: &Resolved, kind: UnravellingKind) -> CliResult<()> {
    let params = params_of(r)?;
    if matches!(kind, UnravellingKind::BondTransport) && params.gamma < 0.0 {
        return Err(CliError::Config(format!(
            "bond-transport jump rates need gamma >= 0, got {}",
            params.gamma
        )));
    }
    // The coherent part is the reciprocal chain; all non-reciprocity enters
    // through the jump channels.
    let coherent = ModelParams {
        gamma: 0.0,
        ..params
    };
    let h = build_xxz_full(&coherent)?;
    let jumps: Vec<SparseOperator> = match kind {
        UnravellingKind::BoundaryAndBond => build_model_a_jumps(&params)?,
        UnravellingKind::BondTransport => build_model_b_jumps(&params)?,
    };
    let model = JumpModel::new(&h, jumps, r.dt_max)?;

    let n_snapshots = step_count(r)?;
    let snapshot_times: Vec<f64> = (0..=n_snapshots).map(|k| k as f64 * r.dt).collect();
    let config = TrajectoryConfig {
        seed: r.seed,
        dt_max: r.dt_max,
        norm_tol: r.norm_tol,
        t_final: n_snapshots as f64 * r.dt,
        snapshot_times,
    };
    config.validate()?;

    let mut initial = vec![C64::new(0.0, 0.0); model.dim()];
    initial[neel_word(r.n_sites) as usize] = C64::new(1.0, 0.0);
    let observer = standard_spin_observer(r.n_sites);

    let records = run_ensemble(&model, &config, r.n_trajectories, &initial, &observer)?;
    let curves = ensemble_average(&records)?;

    let mut dir = RunDir::create(r)?;
    let mut magnetization = dir.csv("mean_magnetization.csv", "t,site,mean,stderr");
    for (i, t) in curves.times.iter().enumerate() {
        for site in 0..r.n_sites {
            magnetization.row(&[t, &site, &curves.mean[i][site], &curves.stderr[i][site]]);
        }
    }
    let mut entropy = dir.csv("entropy_mean.csv", "t,mean,stderr");
    for (t, mean, stderr) in conditional_entropy_average(&records, r.n_sites)? {
        entropy.row(&[&t, &mean, &stderr]);
    }

    let records_path = dir.dir.join("records.jsonl");
    write_records_jsonl(&records_path, &records)?;
    dir.note_artifact(&records_path);

    let total_jumps: usize = records.iter().map(|rec| rec.jump_events.len()).sum();
    dir.record(
        "mean_jumps_per_trajectory",
        total_jumps as f64 / r.n_trajectories as f64,
    );
    dir.record("table_order", model.table_order());

    dir.finish_csv(magnetization)?;
    dir.finish_csv(entropy)?;
    let nominal_steps = (config.t_final / r.dt_max).ceil() as usize;
    dir.write_manifest(r, &vec![model.table_order(); nominal_steps])
}

// ─────────────────────────────────────────────────────────────────────────────
// Single-particle spectra: closed form versus dense diagonalisation
// ─────────────────────────────────────────────────────────────────────────────

fn run_spectra(r: &Resolved) -> CliResult<()> {
    let params = params_of(r)?;
    let op = build_hn_single_particle(&params)?;
    let dense = dense_eigenvalues(&op)?;
    let closed: Vec<C64> = match params.boundary {
        Boundary::Open => hn_obc_spectrum(&params)?.eigenvalues,
        Boundary::Periodic => hn_pbc_spectrum(&params)?,
    };

    // Pair each closed-form value with its nearest unused dense partner —
    // the dense solver's output order is backend-dependent.
    let mut used = vec![false; dense.len()];
    let mut dir = RunDir::create(r)?;
    let mut csv = dir.csv(
        "eigenvalues.csv",
        "index,closed_re,closed_im,dense_re,dense_im,distance",
    );
    let mut worst = 0.0f64;
    for (n, z) in closed.iter().enumerate() {
        let (best, _) = dense
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, a), (_, b)| {
                (*a - z).norm().partial_cmp(&(*b - z).norm()).expect("finite")
            })
            .ok_or_else(|| CliError::Run("dense spectrum exhausted".into()))?;
        used[best] = true;
        let d = (dense[best] - z).norm();
        worst = worst.max(d);
        csv.row(&[&n, &z.re, &z.im, &dense[best].re, &dense[best].im, &d]);
    }
    dir.record("max_pair_distance", worst);
    dir.finish_csv(csv)?;
    dir.write_manifest(r, &[])
}
