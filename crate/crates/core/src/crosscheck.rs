//! Frame-versus-oracle agreement checks.
//!
//! Random circuits of travelling-side Paulis, check-basis pair rotations,
//! and Z-basis check measurements on a handful of EPR pairs are run both
//! ways: classically in the Bell error frame and densely on the
//! statevector. The joint outcome distributions must agree exactly (up to
//! floating-point rounding), which pins the frame encoding, the rotation
//! convention, and the measurement identities to ground truth at once.

use rand::RngExt;

use crate::bell_frame::BellFrameState;
use crate::statevector::DenseState;
use crate::streams::substream;
use crate::{PauliAxis, Result};

const CROSSCHECK_DOMAIN: u64 = 31;

/// One random circuit: element = (pair index, op), where op 0..=2 is a
/// Pauli on the travelling half and 3 is the check-basis rotation.
fn random_circuit<R: rand::Rng>(pairs: usize, rng: &mut R) -> Vec<(usize, u8)> {
    let len = rng.random_range(0..=8);
    (0..len)
        .map(|_| (rng.random_range(0..pairs), rng.random_range(0..4u8)))
        .collect()
}

/// Runs `circuits` random circuits on up to `max_pairs` EPR pairs and
/// returns the largest deviation between the frame-predicted and the
/// dense joint Z-measurement distributions over every qubit.
pub fn frame_oracle_agreement(circuits: u64, max_pairs: usize, master: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for c in 0..circuits {
        let mut rng = substream(master, c, CROSSCHECK_DOMAIN);
        let pairs = 1 + rng.random_range(0..max_pairs);
        let ops = random_circuit(pairs, &mut rng);

        let mut frame = BellFrameState::perfect(pairs);
        let mut dense = DenseState::epr_pairs(pairs, 2 * max_pairs)?;
        let bob = |i: usize| pairs + i;
        for &(i, op) in &ops {
            match op {
                0 => {
                    frame.apply_pauli(crate::bell_frame::PauliOp {
                        axis: PauliAxis::X,
                        index: i,
                    })?;
                    dense.apply_x(bob(i))?;
                }
                1 => {
                    frame.apply_pauli(crate::bell_frame::PauliOp {
                        axis: PauliAxis::Y,
                        index: i,
                    })?;
                    dense.apply_y(bob(i))?;
                }
                2 => {
                    frame.apply_pauli(crate::bell_frame::PauliOp {
                        axis: PauliAxis::Z,
                        index: i,
                    })?;
                    dense.apply_z(bob(i))?;
                }
                _ => {
                    frame.apply_hadamard_bob(i)?;
                    dense.apply_h(i)?;
                    dense.apply_h(bob(i))?;
                }
            }
        }

        // Frame prediction: Alice's bits are uniform and Bob differs
        // exactly where the bit indicator is set.
        let mut eb_mask = 0usize;
        for i in frame.bit_flips().ones() {
            eb_mask |= 1 << i;
        }
        let qubits: Vec<usize> = (0..2 * pairs).collect();
        let dense_dist = dense.z_distribution(&qubits)?;
        let uniform = 1.0 / (1 << pairs) as f64;
        for (bucket, &p) in dense_dist.iter().enumerate() {
            let alice = bucket & ((1 << pairs) - 1);
            let bobbits = bucket >> pairs;
            let expected = if bobbits == alice ^ eb_mask { uniform } else { 0.0 };
            worst = worst.max((p - expected).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_circuits_agree() {
        let worst = frame_oracle_agreement(200, 5, 7).unwrap();
        assert!(worst <= 1e-12, "worst deviation {worst}");
    }
}
