//! One raw-key round of the QPQ protocol: Bob measures his qubit in the
//! computational basis, Alice measures her subsystem in one of two attack
//! triads chosen uniformly at random and guesses Bob's bit from conclusive
//! outcomes. Closed-form guessing probabilities sit next to the Born-rule
//! simulation that checks them.

use rand::Rng;

use crate::families::{computational_basis, cyclic_ket, same_subspace_kets, FamilyParams};
use crate::quantum::{joint_distribution, BipartiteState, Ket, MeasurementBasis, StateEnsemble};
use crate::Result;

/// Alice's conclusion for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guess {
    Zero,
    One,
    /// Inconclusive outcome; no guess emitted.
    Inconclusive,
}

#[derive(Debug, Clone, Copy)]
pub struct KeyRoundResult {
    pub bob_bit: u8,
    pub alice_guess: Guess,
}

impl KeyRoundResult {
    pub fn correct(&self) -> bool {
        matches!(
            (self.bob_bit, self.alice_guess),
            (0, Guess::Zero) | (1, Guess::One)
        )
    }

    pub fn wrong(&self) -> bool {
        matches!(
            (self.bob_bit, self.alice_guess),
            (0, Guess::One) | (1, Guess::Zero)
        )
    }
}

/// Alice's two measurement triads {phi_l, phi'_l, phi''_l} for the general
/// three-angle family, exactly as printed. Construction fails if the printed
/// kets are not orthonormal.
pub fn alice_attack_bases(p: &FamilyParams) -> Result<(MeasurementBasis, MeasurementBasis)> {
    p.validate()?;
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let (sd, cd) = p.delta.sin_cos();
    let i = p.offset_i;

    let a = cg * cd;
    let b = ct * sd - st * sg * cd;
    let c = st * sd + ct * sg * cd;
    let phi0 = cyclic_ket(i, a, b, c);
    let phi1 = cyclic_ket(i, b, a, -c);

    let phi0p = cyclic_ket(i, -cg * sd, st * sg * sd + ct * cd, st * cd - sd * ct * sg);
    let phi0pp = cyclic_ket(i, -sg, -st * cg, ct * cg);
    let phi1p = cyclic_ket(i, st * sg * sd + ct * cd, -cg * sd, -(st * cd - sd * ct * sg));
    let phi1pp = cyclic_ket(i, -st * cg, -sg, -ct * cg);

    let a0 = MeasurementBasis::new(
        3,
        vec![
            ("phi0".into(), phi0),
            ("phi0'".into(), phi0p),
            ("phi0''".into(), phi0pp),
        ],
        None,
    )?;
    let a1 = MeasurementBasis::new(
        3,
        vec![
            ("phi1".into(), phi1),
            ("phi1'".into(), phi1p),
            ("phi1''".into(), phi1pp),
        ],
        None,
    )?;
    Ok((a0, a1))
}

/// Alice's triads for the same-subspace family: phi'_l completes phi_l inside
/// span{|i>,|i+1>}, phi''_l = |i+2>.
pub fn same_subspace_attack_bases(
    theta: f64,
    offset_i: usize,
) -> Result<(MeasurementBasis, MeasurementBasis)> {
    let (phi0, phi1) = same_subspace_kets(theta, offset_i);
    let (s, c) = (theta / 2.0).sin_cos();
    let phi0p = cyclic_ket(offset_i, -s, c, 0.0);
    let phi1p = cyclic_ket(offset_i, s, c, 0.0);
    let third = cyclic_ket(offset_i, 0.0, 0.0, 1.0);
    let a0 = MeasurementBasis::new(
        3,
        vec![
            ("phi0".into(), phi0),
            ("phi0'".into(), phi0p),
            ("phi0''".into(), third.clone()),
        ],
        None,
    )?;
    let a1 = MeasurementBasis::new(
        3,
        vec![
            ("phi1".into(), phi1),
            ("phi1'".into(), phi1p),
            ("phi1''".into(), third),
        ],
        None,
    )?;
    Ok((a0, a1))
}

/// Honest qubit-qubit reference: Alice's bases {phi_l, phi_l^perp} in C^2.
pub fn qubit_attack_bases(theta: f64) -> Result<(MeasurementBasis, MeasurementBasis)> {
    let (s, c) = (theta / 2.0).sin_cos();
    let a0 = MeasurementBasis::new(
        2,
        vec![
            ("phi0".into(), Ket::from_real(&[c, s])),
            ("phi0'".into(), Ket::from_real(&[-s, c])),
        ],
        None,
    )?;
    let a1 = MeasurementBasis::new(
        2,
        vec![
            ("phi1".into(), Ket::from_real(&[c, -s])),
            ("phi1'".into(), Ket::from_real(&[s, c])),
        ],
        None,
    )?;
    Ok((a0, a1))
}

/// Honest qubit-qubit entangled state (1/sqrt2)(|0>|phi_0> + |1>|phi_1>).
pub fn qubit_state(theta: f64) -> Result<BipartiteState> {
    let (s, c) = (theta / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    BipartiteState::new(
        2,
        2,
        [h * c, h * s, h * c, -h * s]
            .iter()
            .map(|&x| num_complex::Complex64::new(x, 0.0))
            .collect(),
    )
}

/// The printed closed form for Alice's total guessing success with the
/// general family: sum of two squared trigonometric polynomials.
pub fn alice_success_general(p: &FamilyParams) -> f64 {
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let (sd, cd) = p.delta.sin_cos();
    let s2d = (2.0 * p.delta).sin();
    let c2d = (2.0 * p.delta).cos();
    let c2g = (2.0 * p.gamma).cos();
    let p1 = st * sg * cg * s2d + ct * cg * c2d - st * ct * sg * c2d - st * st * sd * cd
        + ct * ct * sg * sg * sd * cd;
    let p2 = st * cd * c2g + ct * sg * sd + st * ct * cg * sd + ct * ct * sg * cg * cd;
    p1 * p1 + p2 * p2
}

/// Born-rule value of the same quantity: joint probability that Alice's
/// conclusive guess equals Bob's bit, with the uniform basis choice
/// accounted for. The printed closed form is exactly twice this.
pub fn born_success_general(p: &FamilyParams) -> Result<f64> {
    let state = crate::families::general_qutrit_state(p)?;
    let (a0, a1) = alice_attack_bases(p)?;
    let zero = Ket::basis(2, 0);
    let one = Ket::basis(2, 1);
    // B=0: correct guesses come from basis A1 outcomes phi1', phi1''.
    let b0 = state.born_probability(&zero, &a1.vectors()[1].1)?
        + state.born_probability(&zero, &a1.vectors()[2].1)?;
    // B=1: from basis A0 outcomes phi0', phi0''.
    let b1 = state.born_probability(&one, &a0.vectors()[1].1)?
        + state.born_probability(&one, &a0.vectors()[2].1)?;
    Ok(0.5 * (b0 + b1))
}

/// Closed form for the same-subspace supply: (1/2) sin^2(theta).
pub fn alice_success_same_subspace(theta: f64) -> f64 {
    0.5 * theta.sin() * theta.sin()
}

/// The 6 x 2 conditional table of the same-subspace protocol: rows are
/// Alice's outcomes [phi0, phi0', phi0'', phi1, phi1', phi1''], columns Bob's
/// bit. Entries are Pr(A = row | B = col) with Alice's uniform basis choice
/// folded in, computed by the Born rule.
pub fn section2_conditional_table(theta: f64, offset_i: usize) -> Result<[[f64; 2]; 6]> {
    let state = crate::families::same_subspace_state(theta, offset_i)?;
    let (a0, a1) = same_subspace_attack_bases(theta, offset_i)?;
    let mut table = [[0.0; 2]; 6];
    for col in 0..2 {
        let bob = Ket::basis(2, col);
        for (r, (_, v)) in a0.vectors().iter().chain(a1.vectors()).enumerate() {
            // born includes the state's 1/2 on the Bob amplitude, which
            // coincides with the 1/2 basis-choice weight at Pr(B=col)=1/2.
            table[r][col] = state.born_probability(&bob, v)?;
        }
    }
    Ok(table)
}

/// Simulate one raw-key round against an arbitrary supply.
pub fn simulate_key_round<R: Rng>(
    supply: &StateEnsemble,
    basis_a0: &MeasurementBasis,
    basis_a1: &MeasurementBasis,
    rng: &mut R,
) -> Result<KeyRoundResult> {
    let selector: u8 = rng.gen_range(0..2);
    let alice_basis = if selector == 0 { basis_a0 } else { basis_a1 };
    let dist = joint_distribution(supply, &computational_basis(), alice_basis)?;
    let (bob, alice) = dist.sample(rng);
    // Outcome 0 is phi_l itself (inconclusive); primes are conclusive.
    let conclusive = alice >= 1 && alice < alice_basis.vectors().len();
    let alice_guess = if !conclusive {
        Guess::Inconclusive
    } else if selector == 0 {
        Guess::One
    } else {
        Guess::Zero
    };
    Ok(KeyRoundResult {
        bob_bit: bob as u8,
        alice_guess,
    })
}

/// Fraction of rounds with a correct conclusive guess over `n` rounds.
pub fn simulate_success<R: Rng>(
    supply: &StateEnsemble,
    basis_a0: &MeasurementBasis,
    basis_a1: &MeasurementBasis,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    // The per-round distributions do not change; precompute both.
    let comp = computational_basis();
    let dists = [
        joint_distribution(supply, &comp, basis_a0)?,
        joint_distribution(supply, &comp, basis_a1)?,
    ];
    let n_listed = [basis_a0.vectors().len(), basis_a1.vectors().len()];
    let mut correct = 0usize;
    for _ in 0..n {
        let selector = rng.gen_range(0..2usize);
        let (bob, alice) = dists[selector].sample(rng);
        let conclusive = alice >= 1 && alice < n_listed[selector];
        if conclusive {
            let guess = if selector == 0 { 1 } else { 0 };
            if guess == bob {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / n as f64)
}

/// Charlie supplies |l>|phi_l> and hands l to Alice, who outputs it directly.
/// Returns Alice's exact key-bit accuracy: the Born probability that Bob's
/// computational-basis outcome equals l, averaged over the two halves.
pub fn product_state_attack_correlation(theta: f64, offset_i: usize) -> Result<f64> {
    let ens = crate::families::product_ensemble(theta, offset_i)?;
    let mut acc = 0.0;
    for (l, (w, state)) in ens.members().iter().enumerate() {
        let bob = Ket::basis(2, l);
        let mut p_match = 0.0;
        for j in 0..state.dim_a() {
            p_match += state.born_probability(&bob, &Ket::basis(state.dim_a(), j))?;
        }
        acc += w * p_match;
    }
    Ok(acc)
}

/// Bob's computational-basis marginal for a supply.
pub fn bob_marginal(supply: &StateEnsemble) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (w, state) in supply.members() {
        for (i, slot) in out.iter_mut().enumerate() {
            let bob = Ket::basis(2, i);
            for j in 0..state.dim_a() {
                *slot += w * state.born_probability(&bob, &Ket::basis(state.dim_a(), j))?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        product_ensemble, same_subspace_state, supply_ensemble, FamilyKind, FamilyParams,
    };
    use crate::TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn attack_triads_orthonormal_on_grid() {
        for ti in 0..7 {
            for gi in 0..7 {
                for di in 0..7 {
                    let p = FamilyParams::general(
                        ti as f64 / 6.0 * FRAC_PI_2,
                        gi as f64 / 6.0 * FRAC_PI_2,
                        di as f64 / 6.0 * FRAC_PI_2,
                        di % 3,
                    )
                    .unwrap();
                    alice_attack_bases(&p).expect("printed triads must be orthonormal");
                }
            }
        }
    }

    #[test]
    fn attack_basis_gamma_delta_zero_third_vector() {
        let theta = 0.8;
        let p = FamilyParams::general(theta, 0.0, 0.0, 0).unwrap();
        let (a0, _) = alice_attack_bases(&p).unwrap();
        let phi0pp = &a0.vectors()[2].1;
        assert!((phi0pp.amplitude(1).re + theta.sin()).abs() < TOL);
        assert!((phi0pp.amplitude(2).re - theta.cos()).abs() < TOL);
    }

    #[test]
    fn success_general_examples() {
        let p = FamilyParams::general(FRAC_PI_4, 0.3, FRAC_PI_2, 0).unwrap();
        assert!((alice_success_general(&p) - 0.75).abs() < TOL);
        let p = FamilyParams::general(FRAC_PI_2, 0.9, FRAC_PI_2, 0).unwrap();
        assert!(alice_success_general(&p).abs() < TOL);
    }

    #[test]
    fn success_general_delta_half_pi_is_gamma_free() {
        for ti in 0..20 {
            let theta = ti as f64 / 19.0 * FRAC_PI_2;
            let want = 1.0 - theta.sin().powi(4);
            for gi in 0..20 {
                let gamma = gi as f64 / 19.0 * FRAC_PI_2;
                let p = FamilyParams::general(theta, gamma, FRAC_PI_2, 0).unwrap();
                assert!((alice_success_general(&p) - want).abs() < TOL);
            }
        }
    }

    #[test]
    fn printed_formula_is_twice_born_value() {
        for ti in 0..10 {
            for gi in 0..10 {
                for di in 0..10 {
                    let p = FamilyParams::general(
                        ti as f64 / 9.0 * FRAC_PI_2,
                        gi as f64 / 9.0 * FRAC_PI_2,
                        di as f64 / 9.0 * FRAC_PI_2,
                        gi % 3,
                    )
                    .unwrap();
                    let printed = alice_success_general(&p);
                    let born = born_success_general(&p).unwrap();
                    assert!(
                        (printed - 2.0 * born).abs() < TOL,
                        "printed {printed} born {born}"
                    );
                }
            }
        }
    }

    #[test]
    fn same_subspace_closed_form() {
        assert!((alice_success_same_subspace(FRAC_PI_2) - 0.5).abs() < TOL);
        assert!((alice_success_same_subspace(FRAC_PI_4) - 0.25).abs() < TOL);
    }

    #[test]
    fn section2_table_entries() {
        let theta: f64 = 0.9;
        let (s2, c2) = (theta.sin() * theta.sin(), theta.cos() * theta.cos());
        for offset in 0..3 {
            let t = section2_conditional_table(theta, offset).unwrap();
            let want = [
                [0.5, 0.5 * c2],
                [0.0, 0.5 * s2],
                [0.0, 0.0],
                [0.5 * c2, 0.5],
                [0.5 * s2, 0.0],
                [0.0, 0.0],
            ];
            for r in 0..6 {
                for col in 0..2 {
                    assert!(
                        (t[r][col] - want[r][col]).abs() < TOL,
                        "entry ({r},{col}) offset {offset}"
                    );
                }
            }
        }
    }

    #[test]
    fn table_rows_give_half_sin_squared() {
        let theta = 1.1;
        let t = section2_conditional_table(theta, 0).unwrap();
        let pr = 0.5 * t[4][0] + 0.5 * t[1][1];
        assert!((pr - alice_success_same_subspace(theta)).abs() < TOL);
    }

    #[test]
    fn simulated_same_subspace_matches_closed_form() {
        let theta = 0.8;
        let supply = supply_ensemble(FamilyKind::SameSubspace, theta, 0).unwrap();
        let (a0, a1) = same_subspace_attack_bases(theta, 0).unwrap();
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let got = simulate_success(&supply, &a0, &a1, n, &mut rng).unwrap();
        let p = alice_success_same_subspace(theta);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() < 3.0 * sigma, "got {got} want {p}");
    }

    #[test]
    fn simulated_honest_qubit_matches_closed_form() {
        let theta = 1.2;
        let supply = crate::quantum::StateEnsemble::pure(qubit_state(theta).unwrap());
        let (a0, a1) = qubit_attack_bases(theta).unwrap();
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let got = simulate_success(&supply, &a0, &a1, n, &mut rng).unwrap();
        let p = alice_success_same_subspace(theta);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() < 3.0 * sigma, "got {got} want {p}");
    }

    #[test]
    fn alice_never_wrong_on_conclusive_same_subspace() {
        let theta = 0.7;
        let state = same_subspace_state(theta, 0).unwrap();
        let (a0, a1) = same_subspace_attack_bases(theta, 0).unwrap();
        let zero = crate::quantum::Ket::basis(2, 0);
        let one = crate::quantum::Ket::basis(2, 1);
        // Conclusive outcome pointing the wrong way has zero probability.
        assert!(state.born_probability(&one, &a1.vectors()[1].1).unwrap() < TOL);
        assert!(state.born_probability(&one, &a1.vectors()[2].1).unwrap() < TOL);
        assert!(state.born_probability(&zero, &a0.vectors()[1].1).unwrap() < TOL);
        assert!(state.born_probability(&zero, &a0.vectors()[2].1).unwrap() < TOL);

        let supply = crate::quantum::StateEnsemble::pure(state);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let r = simulate_key_round(&supply, &a0, &a1, &mut rng).unwrap();
            assert!(!r.wrong());
        }
    }

    #[test]
    fn product_attack_gives_full_information() {
        for theta in [0.0, 0.4, 1.0, 1.5] {
            for offset in 0..3 {
                let acc = product_state_attack_correlation(theta, offset).unwrap();
                assert!((acc - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn product_supply_bob_marginal_matches_entangled() {
        let theta = 0.6;
        let prod = product_ensemble(theta, 0).unwrap();
        let ent =
            crate::quantum::StateEnsemble::pure(same_subspace_state(theta, 0).unwrap());
        let mp = bob_marginal(&prod).unwrap();
        let me = bob_marginal(&ent).unwrap();
        for i in 0..2 {
            assert!((mp[i] - me[i]).abs() < TOL);
        }
    }

    #[test]
    fn product_supply_without_side_information_reverts_to_honest_rate() {
        let theta = 0.9;
        let supply = product_ensemble(theta, 0).unwrap();
        let (a0, a1) = same_subspace_attack_bases(theta, 0).unwrap();
        let n = 400_000;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let got = simulate_success(&supply, &a0, &a1, n, &mut rng).unwrap();
        let p = alice_success_same_subspace(theta);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() < 4.0 * sigma, "got {got} want {p}");
    }
}
