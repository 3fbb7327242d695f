//! File formats: instance and parameter JSON, sample CSV, trajectory JSON
//! lines and the raw statevector dump.
//!
//! JSON floats use serde's shortest-roundtrip encoding, so every file reads
//! back bit-identically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::IqpParams;
use crate::error::{Error, Result};
use crate::ising::{GroundTruth, IsingProblem, SpinConfiguration};
use crate::optimize::Trajectory;
use crate::simulator::{SampleSet, StateVector};

/// Instance interchange schema: couplings listed with `i < j`, absent pairs
/// are zero.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    seed: Option<u64>,
    biased: bool,
}

pub fn instance_to_json(problem: &IsingProblem) -> Result<String> {
    let n = problem.n_qubits();
    let mut j = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let v = problem.coupling(a, b);
            if v != 0.0 {
                j.push((a, b, v));
            }
        }
    }
    let file = InstanceFile {
        n,
        h: problem.fields().to_vec(),
        j,
        seed: problem.seed,
        biased: problem.biased,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn instance_from_json(text: &str) -> Result<IsingProblem> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut problem = IsingProblem::new(file.n, file.h, vec![0.0; crate::ising::pair_count(file.n)])?;
    for (i, j, v) in file.j {
        if i >= j || j >= file.n {
            return Err(Error::InvalidInput(format!(
                "coupling indices ({i}, {j}) violate i < j < {}",
                file.n
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite coupling at ({i}, {j})")));
        }
        problem.set_coupling(i, j, v);
    }
    problem.seed = file.seed;
    problem.biased = file.biased;
    Ok(problem)
}

pub fn save_instance(problem: &IsingProblem, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(problem)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<IsingProblem> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

/// Parameter schema mirroring the instance format.
#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    n: usize,
    phi: Vec<f64>,
    theta_lin: Vec<f64>,
    theta_quad: Vec<(usize, usize, f64)>,
}

pub fn params_to_json(params: &IqpParams) -> Result<String> {
    let n = params.n_qubits();
    let mut quad = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = params.theta(i, j);
            if v != 0.0 {
                quad.push((i, j, v));
            }
        }
    }
    let file = ParamsFile {
        n,
        phi: params.phi.clone(),
        theta_lin: params.theta_lin.clone(),
        theta_quad: quad,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn params_from_json(text: &str) -> Result<IqpParams> {
    let file: ParamsFile = serde_json::from_str(text)?;
    if file.phi.len() != file.n || file.theta_lin.len() != file.n {
        return Err(Error::DimensionMismatch(format!(
            "angle vectors must have length {}",
            file.n
        )));
    }
    let mut params = IqpParams::from_parts(
        file.phi,
        file.theta_lin,
        vec![0.0; crate::ising::pair_count(file.n)],
    )?;
    for (i, j, v) in file.theta_quad {
        if i >= j || j >= file.n {
            return Err(Error::InvalidInput(format!(
                "pair indices ({i}, {j}) violate i < j < {}",
                file.n
            )));
        }
        params.set_theta(i, j, v);
    }
    Ok(params)
}

pub fn save_params(params: &IqpParams, path: &Path) -> Result<()> {
    std::fs::write(path, params_to_json(params)?)?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<IqpParams> {
    params_from_json(&std::fs::read_to_string(path)?)
}

/// Writes `bitstring,count,energy,is_ground` rows, one per observed outcome.
/// Bitstrings put qubit 0 first; `is_ground` is blank when no ground truth
/// is supplied.
pub fn write_samples_csv(
    samples: &SampleSet,
    problem: &IsingProblem,
    truth: Option<&GroundTruth>,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bitstring,count,energy,is_ground")?;
    for (&idx, &count) in &samples.counts {
        let bits = SpinConfiguration::from_index(samples.n_qubits(), idx).to_bitstring();
        let energy = problem.energy_of_index(idx);
        let ground = match truth {
            Some(t) => if t.is_ground_index(idx) { "true" } else { "false" },
            None => "",
        };
        writeln!(w, "{bits},{count},{energy},{ground}")?;
    }
    w.flush()?;
    Ok(())
}

/// Raw little-endian float64 dump, interleaved re/im, for debugging only.
pub fn write_statevector_bin(state: &StateVector, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for amp in state.amplitudes() {
        w.write_all(&amp.re.to_le_bytes())?;
        w.write_all(&amp.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryLine {
    tau: f64,
    energy: f64,
    grad_norm: f64,
    gram_condition: Option<f64>,
    params_file: String,
}

/// Writes `<stem>.jsonl` (one record per line) into `dir`, with each
/// record's parameters snapshotted to `<stem>_params_<k>.json` alongside.
pub fn write_trajectory_jsonl(traj: &Trajectory, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.jsonl")))?);
    for (k, rec) in traj.records().iter().enumerate() {
        let params_file = format!("{stem}_params_{k:05}.json");
        save_params(&rec.params, &dir.join(&params_file))?;
        let line = TrajectoryLine {
            tau: rec.tau,
            energy: rec.energy,
            grad_norm: rec.grad_norm,
            gram_condition: rec.gram_condition,
            params_file,
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::sk_random;

    #[test]
    fn instance_roundtrip_is_lossless() {
        let p = sk_random(6, 123, true).unwrap();
        let text = instance_to_json(&p).unwrap();
        let back = instance_from_json(&text).unwrap();
        assert_eq!(p, back);
        assert_eq!(back.seed, Some(123));
        assert!(back.biased);
    }

    #[test]
    fn params_roundtrip_is_lossless() {
        let params = IqpParams::random(5, 7);
        let text = params_to_json(&params).unwrap();
        assert_eq!(params_from_json(&text).unwrap(), params);
    }

    #[test]
    fn instance_rejects_bad_indices() {
        let text = r#"{"n": 3, "h": [0.0, 0.0, 0.0], "J": [[2, 1, 0.5]], "seed": null, "biased": false}"#;
        assert!(instance_from_json(text).is_err());
    }

    #[test]
    fn absent_pairs_read_as_zero() {
        let text = r#"{"n": 3, "h": [0.0, 0.0, 0.0], "J": [[0, 2, 0.5]], "seed": null, "biased": false}"#;
        let p = instance_from_json(text).unwrap();
        assert_eq!(p.coupling(0, 1), 0.0);
        assert_eq!(p.coupling(0, 2), 0.5);
    }
}
