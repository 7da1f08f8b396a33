//! Experiment family implementations.

use super::config::{ExperimentConfig, ExperimentKind};
use crate::aklt::{ground_state_ed, low_spectrum, Boundary, HamiltonianSpec};
use crate::berry::{
    accumulate_phase, berry_phase_hadamard, branch_f2, ed_node_states, exact_v_block, gauge_fix,
    ladder_node_states, ladder_prep_circuit, obc_ladder_circuit, obc_target_mps, postselected_f2,
    Encoding,
};
use crate::circuit::QuditCircuit;
use crate::compile::{compile_isometry, ladder_v_target, CompileOptions, GateSet};
use crate::error::{Error, Result};
use crate::noise::{fidelity_per_site, run_noisy};
use crate::readout::{hellinger_score, reconstruct_ternary, BinaryReadoutModel};
use crate::statevector::basis_index;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Files written plus the machine-readable summary.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// Deterministic float formatting for data files.
fn fnum(x: f64) -> String {
    format!("{x:.12e}")
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String], files: &mut Vec<PathBuf>) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    write_file(dir, name, &text, files)
}

/// Dispatch one experiment; writes outputs under `out_dir` and prints a
/// short summary table.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut outcome = match cfg.experiment {
        ExperimentKind::ObcFidelity => obc_fidelity(cfg, out_dir)?,
        ExperimentKind::PbcStates => pbc_states(cfg, out_dir)?,
        ExperimentKind::BerryExact => berry_exact(cfg, out_dir)?,
        ExperimentKind::BerryNoisy => berry_noisy(cfg, out_dir)?,
        ExperimentKind::NoiseSweep => noise_sweep(cfg, out_dir)?,
        ExperimentKind::DdSweep => dd_sweep(cfg, out_dir)?,
        ExperimentKind::CompileReport => compile_report(cfg, out_dir)?,
    };
    let summary_text = serde_json::to_string_pretty(&json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "results": outcome.summary,
    }))?;
    let path = out_dir.join("summary.json");
    std::fs::write(&path, &summary_text)?;
    outcome.files.push(path);
    Ok(outcome)
}

/// Compile the ladder block for one encoding (seeded, deterministic).
fn compiled_block(cfg: &ExperimentConfig, encoding: Encoding) -> Result<QuditCircuit> {
    let gate_set = encoding.gate_set();
    let target = ladder_v_target(gate_set);
    let opts = CompileOptions {
        tol: cfg.run.compile_tol,
        max_cnots: cfg.run.cnot_budget,
        seed: cfg.seed,
        ..Default::default()
    };
    Ok(compile_isometry(&target, gate_set, &opts)?.circuit)
}

fn theta_grid(points: usize) -> Vec<f64> {
    (0..points).map(|j| std::f64::consts::TAU * j as f64 / points as f64).collect()
}

fn obc_fidelity(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let block = exact_v_block();
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut worst_energy_dev = 0.0f64;
    let mut worst_hellinger = 1.0f64;
    for &n in &cfg.model.n_list {
        let spec = HamiltonianSpec::new(n, Boundary::Obc);
        let e0 = low_spectrum(&spec, 2)?.0[0];
        for b_r in 0..2usize {
            let prep = obc_ladder_circuit(n, b_r, &block)?;
            // readout-reconstructed full-register distribution vs exact
            let model = BinaryReadoutModel {
                assignment_error: cfg.run.assignment_error,
                shots: if cfg.run.shots == 0 { None } else { Some(cfg.run.shots) },
                seed: cfg.seed,
            };
            let (hellinger, circuits_used) = if n <= 5 {
                let rec = reconstruct_ternary(&prep.circuit, &model)?;
                let exact_probs = crate::statevector::run_from_zero(&prep.circuit)?.probabilities();
                let exact_dist = crate::readout::TernaryDistribution {
                    probs: exact_probs,
                    n_sites: prep.circuit.n_sites,
                    circuits_used: 0,
                };
                (hellinger_score(&rec, &exact_dist)?, rec.circuits_used)
            } else {
                (f64::NAN, 0)
            };
            for b_l in 0..2usize {
                let sv = crate::statevector::run_from_zero(&prep.circuit)?;
                let branch = sv.project(&prep.anc_wires, &[b_l]);
                let state = crate::statevector::StateVector::from_amplitudes_normalized(
                    n,
                    branch.amplitudes().to_vec(),
                )?;
                let e = crate::aklt::energy_expectation(&spec, &state)?;
                let dev = (e - e0).abs();
                worst_energy_dev = worst_energy_dev.max(dev);
                // noisy branch fidelity at the first configured rate
                let np = cfg.noise.params(cfg.noise.rates[0], cfg.noise.dd_list[0]);
                let rho = run_noisy(&prep.circuit, &np, cfg.run.max_bond, cfg.run.trunc_tol)?;
                let target = obc_target_mps(n, b_l, b_r)?;
                let f2 = branch_f2(&rho, &prep, &target, b_l)?;
                if hellinger.is_finite() {
                    worst_hellinger = worst_hellinger.min(hellinger);
                }
                rows.push(format!(
                    "{n},{b_l},{b_r},{},{},{},{},{circuits_used}",
                    fnum(e),
                    fnum(dev),
                    fnum(f2),
                    fnum(hellinger),
                ));
            }
        }
    }
    write_csv(
        dir,
        "obc_fidelity.csv",
        "n,b_l,b_r,energy,energy_dev,f2_noisy,hellinger_readout,readout_circuits",
        &rows,
        &mut files,
    )?;
    println!("obc_fidelity: {} states, worst energy deviation {worst_energy_dev:.3e}", rows.len());
    Ok(ExperimentOutcome {
        summary: json!({
            "states": rows.len(),
            "worst_energy_dev": worst_energy_dev,
            "worst_hellinger": worst_hellinger,
        }),
        files,
    })
}

fn pbc_states(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut max_asym = 0.0f64;
    for &n in &cfg.model.n_list {
        for &theta in &theta_grid(cfg.model.theta_points) {
            let spec = HamiltonianSpec::new(n, Boundary::Pbc).with_theta(theta);
            let gs = match ground_state_ed(&spec) {
                Ok(g) => g,
                Err(Error::DegenerateGroundState { .. }) => {
                    ground_state_ed(&spec.clone().with_epsilon(cfg.model.epsilon))?
                }
                Err(e) => return Err(e),
            };
            if n == 2 {
                let amp = gs.state.amplitudes();
                let a = amp[basis_index(&[0, 2])];
                let b = amp[basis_index(&[1, 1])];
                let g = amp[basis_index(&[2, 0])];
                max_asym = max_asym.max((a.norm() - g.norm()).abs());
                rows.push(format!(
                    "{n},{},{},{},{},{},{},{},{},{},{}",
                    fnum(theta),
                    fnum(gs.energy),
                    fnum(gs.gap),
                    fnum(a.norm()),
                    fnum(a.arg()),
                    fnum(b.norm()),
                    fnum(b.arg()),
                    fnum(g.norm()),
                    fnum(g.arg()),
                    fnum((a.norm() - g.norm()).abs()),
                ));
            } else {
                rows.push(format!(
                    "{n},{},{},{},,,,,,,",
                    fnum(theta),
                    fnum(gs.energy),
                    fnum(gs.gap),
                ));
            }
        }
    }
    write_csv(
        dir,
        "pbc_states.csv",
        "n,theta,energy,gap,alpha_mag,alpha_arg,beta_mag,beta_arg,gamma_mag,gamma_arg,alpha_gamma_asym",
        &rows,
        &mut files,
    )?;
    println!("pbc_states: {} grid points, max |α|−|γ| asymmetry {max_asym:.3e}", rows.len());
    Ok(ExperimentOutcome { summary: json!({ "points": rows.len(), "max_alpha_gamma_asym": max_asym }), files })
}

fn berry_exact(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let block = compiled_block(cfg, Encoding::Qutrit)?;
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for &n in &cfg.model.n_list {
        for &parts in &cfg.model.partitions {
            let mut ed = ed_node_states(n, parts, cfg.model.epsilon)?;
            let mut lad = ladder_node_states(n, parts, Encoding::Qutrit, &block)?;
            gauge_fix(&mut ed, cfg.seed)?;
            gauge_fix(&mut lad, cfg.seed)?;
            let (ps_ed, g_ed, m_ed) = accumulate_phase(&ed)?;
            let (ps_lad, g_lad, m_lad) = accumulate_phase(&lad)?;
            let mut max_dev = 0.0f64;
            for j in 0..parts {
                max_dev = max_dev.max((ps_ed[j] - ps_lad[j]).abs());
                let theta = std::f64::consts::TAU * j as f64 / parts as f64;
                rows.push(format!(
                    "{n},{parts},{j},{},{},{},{},{}",
                    fnum(theta),
                    fnum(ps_ed[j]),
                    fnum(ps_lad[j]),
                    fnum(m_ed[j]),
                    fnum(m_lad[j]),
                ));
            }
            println!(
                "berry_exact n={n} N={parts}: gamma_ed={g_ed:.9} gamma_circuit={g_lad:.9} max partial-sum dev={max_dev:.3e}"
            );
            summary.push(json!({
                "n": n, "partitions": parts,
                "gamma_ed": g_ed, "gamma_circuit": g_lad,
                "max_partial_sum_dev": max_dev,
            }));
        }
    }
    write_csv(
        dir,
        "berry_exact.csv",
        "n,partitions,j,theta,partial_sum_ed,partial_sum_circuit,link_mag_ed,link_mag_circuit",
        &rows,
        &mut files,
    )?;
    Ok(ExperimentOutcome { summary: json!(summary), files })
}

fn berry_noisy(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let encodings = cfg.encodings()?;
    let mut blocks: BTreeMap<&'static str, QuditCircuit> = BTreeMap::new();
    for &enc in &encodings {
        let key = match enc {
            Encoding::Qutrit => "qutrit",
            Encoding::Qubit => "qubit",
        };
        blocks.insert(key, compiled_block(cfg, enc)?);
    }
    for &n in &cfg.model.n_list {
        for &parts in &cfg.model.partitions {
            for &enc in &encodings {
                let key = match enc {
                    Encoding::Qutrit => "qutrit",
                    Encoding::Qubit => "qubit",
                };
                let block = &blocks[key];
                let results: Vec<_> = cfg
                    .noise
                    .rates
                    .par_iter()
                    .map(|&rate| {
                        let np = cfg.noise.params(rate, cfg.noise.dd_list[0]);
                        let shots = if cfg.run.shots == 0 {
                            None
                        } else {
                            Some(crate::berry::ShotSampling { shots: cfg.run.shots, seed: cfg.seed })
                        };
                        berry_phase_hadamard(
                            n,
                            parts,
                            enc,
                            block,
                            &np,
                            cfg.run.max_bond,
                            cfg.run.trunc_tol,
                            shots,
                        )
                        .map(|run| (rate, run))
                    })
                    .collect::<Result<_>>()?;
                for (rate, run) in results {
                    println!(
                        "berry_noisy n={n} N={parts} enc={key} rate={rate}: gamma={:.6} (dist to quantized {:.3e})",
                        run.gamma, run.quantization_distance
                    );
                    rows.push(format!(
                        "{n},{parts},{key},{},{},{}",
                        fnum(rate),
                        fnum(run.gamma),
                        fnum(run.quantization_distance),
                    ));
                    runs.push(run);
                }
            }
        }
    }
    write_csv(dir, "berry_noisy.csv", "n,partitions,encoding,noise_rate,gamma,quantization_distance", &rows, &mut files)?;
    write_file(dir, "berry_runs.json", &serde_json::to_string_pretty(&runs)?, &mut files)?;
    Ok(ExperimentOutcome { summary: json!({ "runs": runs.len() }), files })
}

fn noise_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let mut files = Vec::new();
    let encodings = cfg.encodings()?;
    let mut blocks: BTreeMap<&'static str, QuditCircuit> = BTreeMap::new();
    for &enc in &encodings {
        let key = match enc {
            Encoding::Qutrit => "qutrit",
            Encoding::Qubit => "qubit",
        };
        blocks.insert(key, compiled_block(cfg, enc)?);
    }
    let theta = 0.0;
    let mut grid: Vec<(usize, f64, f64, Encoding, &'static str)> = Vec::new();
    for &n in &cfg.model.n_list {
        for &rate in &cfg.noise.rates {
            for &dd in &cfg.noise.dd_list {
                for &enc in &encodings {
                    let key = match enc {
                        Encoding::Qutrit => "qutrit",
                        Encoding::Qubit => "qubit",
                    };
                    grid.push((n, rate, dd, enc, key));
                }
            }
        }
    }
    let results: Vec<String> = grid
        .par_iter()
        .map(|&(n, rate, dd, enc, key)| {
            let np = cfg.noise.params(rate, dd);
            let prep = ladder_prep_circuit(n, theta, enc, &blocks[key])?;
            let rho = run_noisy(&prep.circuit, &np, cfg.run.max_bond, cfg.run.trunc_tol)?;
            let f2 = postselected_f2(&rho, &prep)?;
            Ok(format!(
                "{n},{},{},{key},{},{},{}",
                fnum(rate),
                fnum(dd),
                fnum(f2),
                fnum(fidelity_per_site(f2, n)),
                rho.max_bond_hit,
            ))
        })
        .collect::<Result<_>>()?;
    for r in &results {
        println!("noise_sweep: {r}");
    }
    write_csv(
        dir,
        "noise_sweep.csv",
        "n,noise_rate,dd_strength,encoding,f2,fidelity_per_site,max_bond_hit",
        &results,
        &mut files,
    )?;
    Ok(ExperimentOutcome { summary: json!({ "points": results.len() }), files })
}

fn dd_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let mut files = Vec::new();
    let block = compiled_block(cfg, Encoding::Qutrit)?;
    let n = cfg.model.n_list[0];
    let rate = cfg.noise.rates[0];
    let results: Vec<(f64, f64, f64)> = cfg
        .noise
        .dd_list
        .par_iter()
        .map(|&dd| {
            let np = cfg.noise.params(rate, dd);
            let prep = ladder_prep_circuit(n, 0.0, Encoding::Qutrit, &block)?;
            let rho = run_noisy(&prep.circuit, &np, cfg.run.max_bond, cfg.run.trunc_tol)?;
            let f2 = postselected_f2(&rho, &prep)?;
            Ok((dd, f2, fidelity_per_site(f2, n)))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut monotone = true;
    for (i, &(dd, f2, fps)) in results.iter().enumerate() {
        if i > 0 && fps < results[i - 1].2 - 1e-12 {
            monotone = false;
        }
        println!("dd_sweep n={n} rate={rate} dd={dd}: f2={f2:.9} per-site={fps:.9}");
        rows.push(format!("{n},{},{},qutrit,{},{},0", fnum(rate), fnum(dd), fnum(f2), fnum(fps)));
    }
    write_csv(
        dir,
        "dd_sweep.csv",
        "n,noise_rate,dd_strength,encoding,f2,fidelity_per_site,max_bond_hit",
        &rows,
        &mut files,
    )?;
    Ok(ExperimentOutcome { summary: json!({ "points": rows.len(), "monotone": monotone }), files })
}

fn compile_report(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for gate_set in [GateSet::Qutrit, GateSet::Qubit] {
        let key = match gate_set {
            GateSet::Qutrit => "qutrit",
            GateSet::Qubit => "qubit",
        };
        let target = ladder_v_target(gate_set);
        write_file(dir, &format!("target_{key}.json"), &target.to_json()?, &mut files)?;
        let opts = CompileOptions {
            tol: cfg.run.compile_tol,
            max_cnots: cfg.run.cnot_budget,
            seed: cfg.seed,
            ..Default::default()
        };
        let compiled = compile_isometry(&target, gate_set, &opts)?;
        println!(
            "compile_report {key}: {} CNOTs, circuit cost {:.3e}, structure {:?}",
            compiled.cnot_count(),
            compiled.circuit_cost,
            compiled.structure
        );
        write_file(dir, &format!("compiled_{key}.json"), &compiled.circuit.to_json()?, &mut files)?;
        rows.push(format!(
            "{key},{},{},{}",
            compiled.cnot_count(),
            fnum(compiled.circuit_cost),
            compiled
                .structure
                .iter()
                .map(|&(c, t)| format!("{c}-{t}"))
                .collect::<Vec<_>>()
                .join(";"),
        ));
        summary.push(json!({
            "gate_set": key,
            "cnots": compiled.cnot_count(),
            "circuit_cost": compiled.circuit_cost,
        }));
    }
    write_csv(dir, "compile_report.csv", "gate_set,cnots,circuit_cost,structure", &rows, &mut files)?;
    Ok(ExperimentOutcome { summary: json!(summary), files })
}
