mod oracles;

use atomnoise_core::liouville::build_v;
use num_complex::Complex64;
use oracles::*;

fn random_hermitian(dim: usize, seed: u64) -> M {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = M::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

#[test]
fn drift_matches_operator_form_of_the_master_equation() {
    for (k, cfg) in random_configs(7, 40, 4).iter().enumerate() {
        let sys = library_system(cfg);
        let atom = oracle_atom(cfg);
        let rho = random_hermitian(atom.dim(), k as u64);
        let lib = sys.bloch_rhs(&flatten(&rho));
        let want = flatten(&atom.rhs(&rho));
        let err = (&lib - &want).camax();
        assert!(err < 1e-12 * want.camax().max(1.0), "config {k}: {err:e}");
    }
}

#[test]
fn steady_state_matches_oracle() {
    for (k, cfg) in random_configs(11, 40, 4).iter().enumerate() {
        let sys = library_system(cfg);
        let atom = oracle_atom(cfg);
        let got = unflatten(&sys.steady_state().unwrap().mean, atom.dim());
        let want = atom.steady_state();
        assert!(max_abs(&(&got - &want)) < 1e-9, "config {k}");
    }
}

#[test]
fn field_coupling_matches_finite_differences() {
    // V[:, a] = d(rhs)/d(alpha), V[:, a^H] = d(rhs)/d(alpha_bar) at fixed rho
    for (k, cfg) in random_configs(13, 25, 4).iter().enumerate() {
        let sys = library_system(cfg);
        let atom = oracle_atom(cfg);
        let steady = sys.steady_state().unwrap();
        let rho = unflatten(&steady.mean, atom.dim());
        let v = build_v(&sys, &steady);
        let a0 = c(cfg.rabi / 2.0, 0.0);
        let zero = c(0.0, 0.0);
        let h = 1e-5;
        for mode in 0..2 {
            for conj in [false, true] {
                let eval = |step: f64| {
                    let mut alpha = [a0, zero];
                    let mut alpha_bar = [a0, zero];
                    if conj {
                        alpha_bar[mode] += c(step, 0.0);
                    } else {
                        alpha[mode] += c(step, 0.0);
                    }
                    atom.rhs_with(&atom.hamiltonian_with(alpha, alpha_bar), &rho)
                };
                // the rhs is linear in alpha, so the central difference is exact up to rounding
                let fd = (eval(h) - eval(-h)) * Complex64::new(0.5 / h, 0.0);
                let col = v.column(2 * mode + usize::from(conj)).into_owned();
                let err = (&col - flatten(&fd)).camax();
                assert!(err < 1e-8, "config {k} mode {mode} conj {conj}: {err:e}");
            }
        }
    }
}
