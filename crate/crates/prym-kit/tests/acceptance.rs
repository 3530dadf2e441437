//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Every check is exact (zero tolerance). Run with
//! `cargo test --test acceptance -- --nocapture` to see the per-criterion
//! lines. Two sub-checks of criterion 10 are provably unsatisfiable as
//! printed (see the erratum notes in the repository documentation); those
//! lines report FAIL together with machine-checked impossibility
//! certificates, and the remaining content of the criterion is verified.

use std::collections::BTreeMap;

use prym_kit::abelian::{
    enumerate_antisymmetric_pairings, isotropy_data, make_group, maximal_isotropic_subgroups,
    Subgroup, DEFAULT_GUARD,
};
use prym_kit::clifford::{covering_map, spin4m_cocycle, CliffordElem, SpinWord};
use prym_kit::cyclotomic::{CycMatrix, CycNum};
use prym_kit::extensions::{cocycle_from_section, MatrixGroup, SmallGroup};
use prym_kit::gl_fixed;
use prym_kit::report::{self, small_groups, TaskParams};
use prym_kit::sp_fixed;

fn line(pass: bool, label: &str) {
    println!("[{}] {}", if pass { "PASS" } else { "FAIL" }, label);
}

#[test]
fn criterion_01_pairing_census() {
    let v4 = make_group(&[2, 2]);
    let pairings = enumerate_antisymmetric_pairings(&v4, DEFAULT_GUARD).unwrap();
    assert_eq!(pairings.len(), 2);
    let mut orders = Vec::new();
    for l in &pairings {
        let iso = maximal_isotropic_subgroups(&v4, l, DEFAULT_GUARD).unwrap();
        orders.push(iso[0].order());
    }
    orders.sort_unstable();
    assert_eq!(orders, vec![2, 4]);
    line(
        true,
        "criterion 1: (Z/2)^2 has exactly 2 antisymmetric pairings with isotropic orders 4 and 2",
    );
}

#[test]
fn criterion_02_gl_census_matches_v4_cases() {
    let v4 = make_group(&[2, 2]);
    for n in [2usize, 6, 10] {
        let rows = gl_fixed::enumerate_components_gl(n, &v4, DEFAULT_GUARD, false).unwrap();
        let adm: Vec<_> = rows.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 1, "n = {n}: one admissible class");
        assert!(!adm[0].pairing.is_trivial());
        assert_eq!(adm[0].pushforward_rank, Some(n as u64 / 2));
    }
    for n in [4usize, 8] {
        let rows = gl_fixed::enumerate_components_gl(n, &v4, DEFAULT_GUARD, false).unwrap();
        let adm: Vec<_> = rows.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 2, "n = {n}: two admissible classes");
        let mut ranks: Vec<u64> = adm.iter().filter_map(|r| r.pushforward_rank).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, vec![n as u64 / 4, n as u64 / 2]);
    }
    line(
        true,
        "criterion 2: GL census over (Z/2)^2 matches the n mod 4 case split",
    );
}

#[test]
fn criterion_03_cyclic_catalog() {
    for r in 2..=8u64 {
        for m in 1..=(8 / r as usize) {
            let n = r as usize * m;
            let cat = report::narasimhan_ramanan_catalog(n, r).unwrap();
            assert_eq!(cat.block_shape, vec![m; r as usize], "G^θ = GL(m)^r");
            assert!(cat.sigma_theta_full, "Σ_θ = Λ*");
            assert!(cat.cocycle_trivial, "trivial cocycle from the S-section");
        }
    }
    // r ∤ n: empty census and a rejected catalog
    assert!(report::narasimhan_ramanan_catalog(3, 2).is_err());
    let z2 = make_group(&[2]);
    let rows = gl_fixed::enumerate_components_gl(3, &z2, DEFAULT_GUARD, false).unwrap();
    assert!(rows.iter().all(|r| !r.admissible));
    line(
        true,
        "criterion 3: cyclic catalog (rm ≤ 8) has GL(m)^r blocks, full Σ_θ, trivial cocycle; r ∤ n is empty",
    );
}

#[test]
fn criterion_04_cor_6_4_equivalence_sweep() {
    let out = report::run_task(
        "cor-6.4",
        &TaskParams {
            max_lambda: Some(16),
            max_n: Some(8),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out.pass, "{}", out.details);
    line(
        true,
        &format!(
            "criterion 4: admissibility ⟺ surjective c_θ over |Λ| ≤ 16, n ≤ 8 ({})",
            out.details
        ),
    );
}

#[test]
fn criterion_05_lemma_6_3_properties() {
    // all admissible triples in the sweep range of criterion 4
    let mut triples = 0usize;
    for lambda in small_groups(16) {
        for l in enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap() {
            for delta in maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD).unwrap() {
                let dorder = delta.order() as usize;
                for n in (dorder..=8).step_by(dorder) {
                    let t = gl_fixed::construct_admissible_s(&lambda, &l, &delta, n).unwrap();
                    let sigma = gl_fixed::sigma_theta(&t).unwrap();
                    assert_eq!(sigma.len() as u64, lambda.order());
                    for (g1, m1) in &sigma {
                        // defining relation for every λ
                        for (e, sm) in &t.s {
                            let lhs = sm.int_conj(m1).unwrap();
                            let rhs = m1.scalar_mul(&t.lambda.char_value(g1, e));
                            assert_eq!(lhs, rhs, "Int_{{s(λ)}}(M^γ) = γ(λ)M^γ");
                        }
                        // product law lands in Z(G^θ)
                        for (g2, m2) in &sigma {
                            let g12 = t.lambda.char_mul(g1, g2);
                            let m12 = sigma
                                .iter()
                                .find(|(g, _)| g == &g12)
                                .map(|(_, m)| m.clone())
                                .unwrap();
                            let z = m1.mul(m2).mul(&m12.inverse().unwrap());
                            let pm = prym_kit::cyclotomic::analyze_permutation_matrix(
                                &z,
                                &t.weights,
                                t.delta_factors(),
                            )
                            .unwrap();
                            assert_eq!(pm.p_image, t.iso.delta.group.trivial_character());
                            let scalars = pm.scalar_blocks().expect("scalar blocks");
                            // constant on f(Λ/Δ)-cosets
                            let f_image = t.iso.f_image();
                            for (bi, b) in t.weights.blocks.iter().enumerate() {
                                for fi in &f_image {
                                    let shifted =
                                        t.iso.delta.group.char_mul(&b.character, fi);
                                    let ti = t
                                        .weights
                                        .block_index_of_character(&shifted)
                                        .unwrap();
                                    assert_eq!(scalars[bi], scalars[ti]);
                                }
                            }
                        }
                    }
                    triples += 1;
                }
            }
        }
    }
    line(
        true,
        &format!("criterion 5: M^γ defining relation and Z(G^θ) product law on {triples} admissible triples"),
    );
}

#[test]
fn criterion_06_lemma_6_6_roundtrip_uniqueness() {
    let mut cases = 0usize;
    for lambda in small_groups(16) {
        for l in enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap() {
            for delta in maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD).unwrap() {
                let dorder = delta.order() as usize;
                for n in (dorder..=8).step_by(dorder) {
                    let t1 =
                        gl_fixed::construct_admissible_s_with_choices(&lambda, &l, &delta, n, false)
                            .unwrap();
                    assert_eq!(
                        gl_fixed::induced_pairing(&lambda, &t1.s).unwrap(),
                        l,
                        "induced_pairing ∘ construct = id"
                    );
                    let t2 =
                        gl_fixed::construct_admissible_s_with_choices(&lambda, &l, &delta, n, true)
                            .unwrap();
                    assert_eq!(
                        gl_fixed::theta_class(&t1).unwrap(),
                        gl_fixed::theta_class(&t2).unwrap(),
                        "θ-class independent of construction choices"
                    );
                    if n <= 4 && lambda.order() <= 4 {
                        assert!(
                            gl_fixed::monomial_conjugator(&t1, &t2).is_some(),
                            "monomial conjugator must exist for tiny equal classes"
                        );
                    }
                    cases += 1;
                }
            }
        }
    }
    line(
        true,
        &format!("criterion 6: pairing round trip, choice independence and tiny-case conjugacy on {cases} cases"),
    );
}

#[test]
fn criterion_07_sp_catalog() {
    let cat = report::sp_order2_catalog(2).unwrap();
    assert!(cat.j_squared_is_minus_one, "J² = -I");
    // S-form conjugate to J by the explicit conjugator, symplectic up to a
    // root-of-unity defect (here rescaled to defect 1)
    let conj = cat
        .conjugator
        .mul(&cat.s_form)
        .mul(&cat.conjugator.inverse().unwrap());
    assert_eq!(conj, cat.j_matrix);
    assert!(cat.conjugator_defect.as_root_of_unity().is_some());
    assert!(cat.j_cocycle_value_is_minus_one, "c(1̄,1̄) = -1 from t(1̄) = J");
    assert_eq!(cat.t_squared_is_one, Some(true), "T² = I");
    assert_eq!(cat.t_cocycle_trivial, Some(true), "trivial T-cocycle");
    line(
        true,
        "criterion 7: J² = -I, S-form conjugate to J (root-of-unity defect), cocycle -1, T² = I trivial cocycle",
    );
}

#[test]
fn criterion_08_sp_lemma_suite() {
    // normalize_sp round trips on pseudo-random symplectic conjugates
    let out = report::run_task("lemma-7.2", &TaskParams::default()).unwrap();
    assert!(out.pass, "{}", out.details);
    // M^γ symplectic with squares ±1 per the case split, via lemma-7.3
    let out = report::run_task("lemma-7.3", &TaskParams::default()).unwrap();
    assert!(out.pass, "{}", out.details);
    // D anticommutes with M^q in the q = γ case
    let lambda = make_group(&[2, 2]);
    let l = prym_kit::abelian::Pairing::trivial(&lambda);
    let delta = Subgroup::full(&lambda);
    let iso = isotropy_data(&lambda, &l, &delta).unwrap();
    let q = iso
        .delta
        .group
        .characters()
        .into_iter()
        .find(|c| c.exponents.iter().any(|&e| e != 0))
        .unwrap();
    let t = sp_fixed::construct_admissible_s_sp(&lambda, &l, &delta, &q, 2, None).unwrap();
    let gamma = t
        .lambda
        .characters()
        .into_iter()
        .find(|g| t.restrict(g) == q)
        .unwrap();
    let g = sp_fixed::build_m_gamma_sp(&t, &gamma).unwrap();
    assert_eq!(g.square_sign, -1);
    let d = sp_fixed::anticommuting_d(&t).unwrap();
    assert_eq!(
        d.mul(&g.matrix),
        g.matrix.mul(&d).scalar_mul(&CycNum::from_int(-1)),
        "D·M^q = -M^q·D"
    );
    // and more random symplectic conjugates with |Λ| = 4
    for seed in [3i64, 7] {
        let mut gmat = CycMatrix::identity(4);
        gmat.set(0, 2, CycNum::from_int(seed));
        gmat.set(1, 3, CycNum::from_int(seed - 1));
        assert!(gmat.is_symplectic().unwrap());
        let ginv = gmat.inverse().unwrap();
        let mut raw = BTreeMap::new();
        for (e, m) in &t.s {
            raw.insert(e.clone(), gmat.mul(m).mul(&ginv));
        }
        let (t2, _c, defect) = sp_fixed::normalize_sp(&lambda, &raw, DEFAULT_GUARD).unwrap();
        assert_eq!(
            sp_fixed::theta_class_sp(&t2).unwrap(),
            sp_fixed::theta_class_sp(&t).unwrap()
        );
        assert!(!defect.is_zero());
    }
    line(
        true,
        "criterion 8: symplectic normalization round trips; M^γ ∈ Sp with (M^γ)² = ±I; D anticommutes with M^q",
    );
}

#[test]
fn criterion_09_remark_7_6() {
    let out = report::run_task("remark-7.6", &TaskParams::default()).unwrap();
    assert!(out.pass, "{}", out.details);
    line(
        true,
        "criterion 9: order variants {2,4} constructed and distinguished; single class when q = γ or q ∉ f",
    );
}

#[test]
fn criterion_10_spin_suite() {
    let n = 4usize;
    // 10a: s² = 1
    let inv = prym_kit::clifford::build_spin_involution_data(4, 2, 2).unwrap();
    let ok_a = inv.s_squared == CliffordElem::one(4);
    line(ok_a, "criterion 10a: s² = 1");
    assert!(ok_a);
    // 10b (literal): an element J' with f(J') = J and J'² = -1.
    // Impossibility certificate: the fibre of J has exactly two elements
    // ±(rotation lift), and both square to -ω ≠ ±1.
    let data = spin4m_cocycle(1).unwrap();
    let minus_omega = CliffordElem::volume(n).neg();
    let lift_sq = data.rotation_lift_squared.clone();
    let other = data.rotation_lift.neg();
    let other_sq = other.elem().mul(other.elem()).unwrap();
    let certificate = lift_sq == minus_omega
        && other_sq == minus_omega
        && minus_omega.as_scalar().is_none()
        && covering_map(&data.rotation_lift).unwrap() == CycMatrix::j_std(n);
    assert!(certificate, "impossibility certificate must hold");
    line(
        false,
        "criterion 10b: J'² = -1 with f(J') = J  — impossible: both lifts of J square to -ω (certified); the ω₁-corrected section squares to -1 exactly",
    );
    // the truthful replacement: the canonical a-section squares to -1
    assert_eq!(
        data.t_a_squared,
        CliffordElem::scalar(n, CycNum::from_int(-1))
    );
    // 10c: f(J') = J for the rotation lift
    let ok_c = data.j_matrix == CycMatrix::j_std(n);
    line(ok_c, "criterion 10c: f(J') = J");
    assert!(ok_c);
    // 10d: f is a homomorphism on 100 random word pairs, n ≤ 8
    let mut rng_state = 0x5eed5u64;
    let mut next = move || {
        // xorshift
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        rng_state
    };
    let dims = [4usize, 6, 8];
    let mut pairs_checked = 0;
    'outer: for trial in 0..100 {
        let nn = dims[trial % dims.len()];
        let mut make_word = |len: usize| -> SpinWord {
            let mut w = SpinWord::identity(nn);
            for _ in 0..len {
                let choice = next() as usize;
                let i = choice % nn;
                let j = (choice / nn) % nn;
                let v = if i != j && choice % 3 == 0 {
                    // rational point on the sphere: (3/5, 4/5) in plane (i, j)
                    let mut v = vec![CycNum::zero(); nn];
                    v[i] = CycNum::from_ratio(3, 5);
                    v[j] = CycNum::from_ratio(4, 5);
                    v
                } else if choice % 3 == 1 {
                    // norm -1 vector i·e_i
                    let mut v = vec![CycNum::zero(); nn];
                    v[i] = CycNum::i();
                    v
                } else {
                    let mut v = vec![CycNum::zero(); nn];
                    v[i] = CycNum::one();
                    v
                };
                let factor = SpinWord::new(nn, CycNum::one(), vec![v]).unwrap();
                w = w.mul(&factor).unwrap();
            }
            w
        };
        let w1 = make_word(2);
        let w2 = make_word(2);
        let f1 = covering_map(&w1).unwrap();
        let f2 = covering_map(&w2).unwrap();
        let f12 = covering_map(&w1.mul(&w2).unwrap()).unwrap();
        if f12 != f1.mul(&f2) {
            line(false, "criterion 10d: f homomorphism on random word pairs");
            assert_eq!(f12, f1.mul(&f2));
            break 'outer;
        }
        pairs_checked += 1;
    }
    line(
        pairs_checked == 100,
        "criterion 10d: f(w·w') = f(w)·f(w') on 100 random word pairs (n ≤ 8)",
    );
    assert_eq!(pairs_checked, 100);
    // 10e (literal): exception set equals {(b,a),(a,a),(ba,b),(b,ab)}.
    // Impossibility certificate: that set violates the 2-cocycle identity at
    // (a, a, b) — with c(a,b) = 1 the identity forces c(a,ab) = c(a,a) ≠ 1,
    // but (a,ab) is not in the printed set.
    {
        use prym_kit::extensions::{Cocycle2, CocycleCheck};
        let gamma = SmallGroup::from_abelian(&make_group(&[2, 2]));
        let z = SmallGroup::from_table(
            vec![vec![0, 1], vec![1, 0]],
            vec!["1".into(), "-1".into()],
        );
        let action = vec![vec![0u16, 1]; 4];
        let (b, a, ab) = (1usize, 2usize, 3usize);
        let mut printed = vec![0u16; 16];
        for (x, y) in [(b, a), (a, a), (ab, b), (b, ab)] {
            printed[x * 4 + y] = 1;
        }
        let pg = Cocycle2::new(gamma, z, action, printed);
        let check = pg.verify();
        assert!(
            matches!(check, CocycleCheck::IdentityFailed { .. }),
            "certificate: printed set violates the cocycle identity"
        );
        line(
            false,
            "criterion 10e: exception set equals the printed {(b,a),(a,a),(ba,b),(b,ab)} — impossible: that table violates the cocycle identity at (a,a,b) (certified); computed set is {(b,a),(a,a),(a,ab),(b,ab)}",
        );
    }
    // the truthful replacement: the computed table verifies, takes values in
    // {±1} and its exception set differs from the printed one in one slot
    assert!(data.extraction.cocycle.verify().is_ok());
    assert_eq!(data.extraction.cocycle.z.order(), 2);
    let mut got = data.exceptions.clone();
    got.sort();
    let mut want: Vec<(String, String)> = [("b", "a"), ("a", "a"), ("a", "ab"), ("b", "ab")]
        .iter()
        .map(|(x, y)| (x.to_string(), y.to_string()))
        .collect();
    want.sort();
    assert_eq!(got, want);
    line(
        false,
        "criterion 10 overall: two sub-checks are unattainable as printed (documented erratum with machine-checked certificates); all remaining content verified exactly",
    );
}

#[test]
fn criterion_11_cocycle_machinery() {
    // verify_cocycle on all cocycles extracted across the toolkit
    let spin = spin4m_cocycle(1).unwrap();
    assert!(spin.extraction.cocycle.verify().is_ok());
    let cat = report::sp_order2_catalog(2).unwrap();
    assert!(cat.j_cocycle_value_is_minus_one);
    let nr = report::narasimhan_ramanan_catalog(6, 3).unwrap();
    assert!(nr.cocycle_trivial);
    // GL block-group cocycles on admissible (Z/2)^2 triples
    let lambda = make_group(&[2, 2]);
    for l in enumerate_antisymmetric_pairings(&lambda, DEFAULT_GUARD).unwrap() {
        let delta = maximal_isotropic_subgroups(&lambda, &l, DEFAULT_GUARD)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let n = delta.order() as usize;
        let t = gl_fixed::construct_admissible_s(&lambda, &l, &delta, n).unwrap();
        let data = gl_fixed::block_group_and_tau(&t).unwrap();
        assert!(data.cocycle.verify().is_ok());
    }
    // twisted-product associativity, exhaustive for |G₀|·|Γ| ≤ 10⁴,
    // and the Prop 2.4 round trip via the battery task
    let out = report::run_task("prop-2.4-roundtrip", &TaskParams::default()).unwrap();
    assert!(out.pass, "{}", out.details);
    // a larger exhaustive associativity case: ⟨ζ₈⟩ × ℤ/2 twisted by inversion
    {
        use std::rc::Rc;
        let z8 = CycMatrix::from_rows(vec![vec![CycNum::root_of_unity(8, 1)]]);
        let g0 = MatrixGroup::new(vec![z8], 16);
        let gamma = SmallGroup::from_abelian(&make_group(&[2]));
        let id_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> = Rc::new(|m: &CycMatrix| m.clone());
        let inv_map: Rc<dyn Fn(&CycMatrix) -> CycMatrix> =
            Rc::new(|m: &CycMatrix| m.inverse().unwrap());
        let one = CycMatrix::identity(1);
        let minus = one.scalar_mul(&CycNum::from_int(-1));
        let tw = prym_kit::extensions::TwistedGroup::new(
            g0,
            gamma,
            vec![id_map, inv_map],
            vec![one.clone(), one.clone(), one.clone(), minus],
        );
        assert_eq!(tw.verify_exhaustive(10_000), Some(true));
    }
    line(
        true,
        "criterion 11: extracted cocycles verify; twisted products associative (exhaustive); Prop 2.4 round trip is the identity",
    );
}

#[test]
fn criterion_12_census_determinism() {
    let lambda = make_group(&[2, 2]);
    let mut outputs = Vec::new();
    for threads in [1usize, 2, 4] {
        let rep = report::run_gl_census(4, &lambda, DEFAULT_GUARD, false, threads).unwrap();
        outputs.push(serde_json::to_string(&rep).unwrap());
        let sp = report::run_sp_census(2, &lambda, DEFAULT_GUARD, false, threads).unwrap();
        outputs.push(serde_json::to_string(&sp).unwrap());
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[0], outputs[4]);
    assert_eq!(outputs[1], outputs[3]);
    assert_eq!(outputs[1], outputs[5]);
    // and through the real binary with different parallelism settings
    let exe = env!("CARGO_BIN_EXE_prym-kit");
    let mut bin_outputs = Vec::new();
    for threads in ["1", "2", "4"] {
        let out = std::process::Command::new(exe)
            .args([
                "census", "gl", "--n", "6", "--lambda", "2,2", "--threads", threads,
            ])
            .output()
            .expect("census run");
        assert!(out.status.success());
        bin_outputs.push(out.stdout);
    }
    assert_eq!(bin_outputs[0], bin_outputs[1]);
    assert_eq!(bin_outputs[0], bin_outputs[2]);
    line(
        true,
        "criterion 12: census reports byte-identical across 3 runs with threads 1, 2, 4",
    );
}

/// Extra: cocycle extraction on the section k̄ ↦ S^k for the cyclic model
/// n = 4, r = 2 (the printed diag(1,1,-1,-1) / block-swap pair).
#[test]
fn cyclic_catalog_printed_matrices() {
    let cat = report::narasimhan_ramanan_catalog(4, 2).unwrap();
    assert_eq!(
        cat.m_matrix,
        CycMatrix::diagonal(&[
            CycNum::one(),
            CycNum::one(),
            CycNum::from_int(-1),
            CycNum::from_int(-1),
        ])
    );
    // S is the two-block swap
    let swap = CycMatrix::from_int_rows(&[
        &[0, 0, 1, 0],
        &[0, 0, 0, 1],
        &[1, 0, 0, 0],
        &[0, 1, 0, 0],
    ]);
    assert_eq!(cat.s_matrix, swap);
    // the cocycle on the section is computed from the group, re-verified
    let lam_star = SmallGroup::from_abelian(&make_group(&[2]));
    let g = MatrixGroup::new(vec![cat.m_matrix.clone(), cat.s_matrix.clone()], 1 << 10);
    let ext = cocycle_from_section(
        &g,
        &lam_star,
        &[CycMatrix::identity(4), cat.s_matrix.clone()],
        &[cat.m_matrix.clone()],
        64,
    )
    .unwrap();
    assert!(ext.cocycle.is_trivial_table());
}
