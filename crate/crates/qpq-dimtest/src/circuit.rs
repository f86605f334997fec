//! Preparation circuit for the entangled qubit-qutrit family: Hadamard on
//! the qubit, Euler rotation R = Rx(theta) Ry(gamma) Rz(delta) on the
//! qutrit, then a six-dimensional entangling unitary U.

use num_complex::Complex64;

use crate::quantum::BipartiteState;
use crate::{Error, Result, TOL};

type Mat3 = [[f64; 3]; 3];
type Mat6 = [[f64; 6]; 6];

/// Euler rotation on the qutrit with its parameter record.
#[derive(Debug, Clone)]
pub struct QutritRotation {
    pub theta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub matrix: Mat3,
}

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn rx(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn ry(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

fn rz(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// R = Rx(theta) Ry(gamma) Rz(delta). The axis-rotation sign convention is
/// pinned by requiring the first column to equal the phi_0 coefficient
/// vector; construction fails loudly if that invariant breaks.
pub fn build_rotation(theta: f64, gamma: f64, delta: f64) -> Result<QutritRotation> {
    let matrix = mat3_mul(&rx(theta), &mat3_mul(&ry(gamma), &rz(delta)));

    let (st, ct) = theta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let (sd, cd) = delta.sin_cos();
    let want = [cg * cd, ct * sd - st * sg * cd, st * sd + ct * sg * cd];
    let dev = (0..3)
        .map(|r| (matrix[r][0] - want[r]).abs())
        .fold(0.0, f64::max);
    if dev > TOL {
        return Err(Error::InvalidParameter(format!(
            "rotation convention check failed: first-column deviation {dev:e}"
        )));
    }
    Ok(QutritRotation {
        theta,
        gamma,
        delta,
        matrix,
    })
}

impl QutritRotation {
    /// Max |R^T R - I| entry.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| self.matrix[k][i] * self.matrix[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - want).abs());
            }
        }
        dev
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// The entangler acting on the qubit ⊗ qutrit computational basis:
/// identity on the |0>-block, swap |10><->|11| and negate |12>.
#[derive(Debug, Clone)]
pub struct EntanglerU {
    pub matrix: Mat6,
}

pub fn build_entangler() -> EntanglerU {
    // Index convention k = i_B * 3 + i_A.
    let mut m = [[0.0; 6]; 6];
    m[0][0] = 1.0; // |00><00|
    m[1][1] = 1.0; // |01><01|
    m[2][2] = 1.0; // |02><02|
    m[4][3] = 1.0; // |11><10|
    m[3][4] = 1.0; // |10><11|
    m[5][5] = -1.0; // -|12><12|
    EntanglerU { matrix: m }
}

impl EntanglerU {
    pub fn apply(&self, v: &[f64; 6]) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, row) in self.matrix.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
        out
    }

    /// Max |U^T U - I| entry (U is real, so this is the unitarity defect).
    pub fn unitarity_defect(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = (0..6).map(|k| self.matrix[k][i] * self.matrix[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - want).abs());
            }
        }
        dev
    }
}

/// U (H ⊗ R) |0>|0>: the circuit output as a bipartite state.
pub fn prepare(theta: f64, gamma: f64, delta: f64) -> Result<BipartiteState> {
    let r = build_rotation(theta, gamma, delta)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (H ⊗ R)|00>: qubit -> (|0>+|1>)/sqrt2, qutrit -> first column of R.
    let mut v = [0.0; 6];
    for i_a in 0..3 {
        v[i_a] = h * r.matrix[i_a][0];
        v[3 + i_a] = h * r.matrix[i_a][0];
    }
    let v = build_entangler().apply(&v);
    BipartiteState::new(2, 3, v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
}

/// |<a|b>| between two bipartite states (global-phase-free distance check).
pub fn fidelity(a: &BipartiteState, b: &BipartiteState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(u, v)| u.conj() * v)
        .sum::<Complex64>()
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{general_qutrit_kets, general_qutrit_state, FamilyParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rotation_identity_at_zero() {
        let r = build_rotation(0.0, 0.0, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((r.matrix[i][j] - want).abs() < TOL);
            }
        }
    }

    #[test]
    fn x_rotation_fixes_first_component() {
        let r = build_rotation(0.8, 0.0, 0.0).unwrap();
        assert!((r.matrix[0][0] - 1.0).abs() < TOL);
        assert!(r.matrix[0][1].abs() < TOL && r.matrix[1][0].abs() < TOL);
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let r = build_rotation(
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
            )
            .unwrap();
            assert!(r.orthogonality_defect() < TOL);
            assert!((r.determinant() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn entangler_action_list() {
        let u = build_entangler();
        let e = |k: usize| {
            let mut v = [0.0; 6];
            v[k] = 1.0;
            v
        };
        assert_eq!(u.apply(&e(3)), e(4)); // U|10> = |11>
        assert_eq!(u.apply(&e(4)), e(3)); // U|11> = |10>
        assert_eq!(u.apply(&e(2)), e(2)); // U|02> = |02>
        let mut neg = e(5);
        neg[5] = -1.0;
        assert_eq!(u.apply(&e(5)), neg); // U|12> = -|12>
    }

    #[test]
    fn entangler_squares_to_identity() {
        let u = build_entangler();
        assert!(u.unitarity_defect() < TOL);
        for k in 0..6 {
            let mut v = [0.0; 6];
            v[k] = 1.0;
            let twice = u.apply(&u.apply(&v));
            for (i, &x) in twice.iter().enumerate() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((x - want).abs() < TOL);
            }
        }
    }

    #[test]
    fn prepare_at_zero_is_maximally_entangled_pair() {
        let st = prepare(0.0, 0.0, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((st.amplitude(0, 0).re - h).abs() < TOL);
        assert!((st.amplitude(1, 1).re - h).abs() < TOL);
    }

    #[test]
    fn prepare_matches_family_on_random_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let (t, g, d) = (
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
            );
            let circuit = prepare(t, g, d).unwrap();
            let family =
                general_qutrit_state(&FamilyParams::general(t, g, d, 0).unwrap()).unwrap();
            assert!((fidelity(&circuit, &family) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn circuit_phi1_is_swap_and_negate_of_phi0() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let (t, g, d) = (
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
                rng.gen::<f64>() * FRAC_PI_2,
            );
            let st = prepare(t, g, d).unwrap();
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let p = FamilyParams::general(t, g, d, 0).unwrap();
            let (phi0, _) = general_qutrit_kets(&p);
            // phi1 block: components 0<->1 swapped, component 2 negated
            assert!((st.amplitude(1, 0).re - h * phi0.amplitude(1).re).abs() < TOL);
            assert!((st.amplitude(1, 1).re - h * phi0.amplitude(0).re).abs() < TOL);
            assert!((st.amplitude(1, 2).re + h * phi0.amplitude(2).re).abs() < TOL);
        }
    }

    #[test]
    fn prepare_delta_half_pi_gamma_zero() {
        let t = 0.7;
        let st = prepare(t, 0.0, FRAC_PI_2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(st.amplitude(0, 0).norm() < TOL);
        assert!((st.amplitude(0, 1).re - h * t.cos()).abs() < TOL);
        assert!((st.amplitude(0, 2).re - h * t.sin()).abs() < TOL);
    }
}
