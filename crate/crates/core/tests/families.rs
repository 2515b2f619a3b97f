mod common;

use common::*;
use nested_mzi::*;

fn params(alpha2: f64) -> BeamSplitterParams {
    BeamSplitterParams::new(alpha2).unwrap()
}

fn basis(d: &Dynamics, t: usize, label: &str) -> Ket {
    Ket::basis(d.slices()[t].clone(), label).unwrap()
}

fn proj(d: &Dynamics, t: usize, labels: &[&str]) -> Projector {
    Projector::from_labels(&d.slices()[t], labels).unwrap()
}

fn assert_ket(k: &Ket, want: &[f64], tol: f64) {
    for (i, w) in want.iter().enumerate() {
        let got = k.amplitudes()[i];
        assert!(
            (got - c(*w)).norm() <= tol,
            "component {i}: got {got}, want {w}"
        );
    }
}

#[test]
fn forward_states_match_closed_form() {
    for alpha2 in ALPHA_GRID {
        let d = build_nested_mzi(params(alpha2)).unwrap();
        let (a, b) = (alpha2.sqrt(), (1.0 - alpha2).sqrt());
        let s0 = basis(&d, 0, "S");
        assert_ket(&d.transport(&s0, 1).unwrap(), &[a, b, 0.0], 1e-15);
        assert_ket(&d.transport(&s0, 2).unwrap(), &[a, R * b, R * b], 1e-15);
        assert_ket(&d.transport(&s0, 3).unwrap(), &[a, 0.0, b], 1e-15);
        assert_ket(&d.transport(&s0, 4).unwrap(), &[alpha2, a * b, b], 1e-15);
    }
}

#[test]
fn backward_wave_at_t2() {
    for alpha2 in ALPHA_GRID {
        let d = build_nested_mzi(params(alpha2)).unwrap();
        let (a, b) = (alpha2.sqrt(), (1.0 - alpha2).sqrt());
        let phi2 = backward_state(&d, &basis(&d, 4, "F"), 2).unwrap();
        assert_ket(&phi2, &[a, -R * b, R * b], 1e-15);
    }
}

#[test]
fn q0_transport_matches_composed_steps() {
    for alpha2 in ALPHA_GRID {
        let d = build_nested_mzi(params(alpha2)).unwrap();
        let (a, b) = (alpha2.sqrt(), (1.0 - alpha2).sqrt());
        let out = d.transport(&basis(&d, 0, "Q"), 4).unwrap();
        assert_ket(&out, &[-b, a, 0.0], 1e-15);
        // hand-written matrices agree
        let oracle = chain_oracle(
            &mzi_steps(alpha2),
            &[c(0.0), c(0.0), c(1.0)],
            &[None, None, None, None, Some(identity(3))],
        );
        assert!(out
            .amplitudes()
            .iter()
            .zip(&oracle)
            .all(|(x, y)| (x - y).norm() < 1e-15));
    }
}

#[test]
fn special_parameters_forward_amplitudes() {
    let d = build_nested_mzi(BeamSplitterParams::special()).unwrap();
    let s0 = basis(&d, 0, "S");
    assert_ket(
        &d.transport(&s0, 4).unwrap(),
        &[1.0 / 3.0, 2f64.sqrt() / 3.0, (2.0f64 / 3.0).sqrt()],
        1e-15,
    );
}

#[test]
fn inner_interferometer_sends_d_to_h() {
    for alpha2 in [0.05, 0.5, 0.95] {
        let d = build_nested_mzi(params(alpha2)).unwrap();
        let out = d.transport(&basis(&d, 1, "D"), 3).unwrap();
        assert_ket(&out, &[0.0, 0.0, 1.0], 1e-15);
    }
}

#[test]
fn no_bs34_transport_and_weights() {
    for alpha2 in ALPHA_GRID {
        let p = params(alpha2);
        let d = build_no_bs34(p).unwrap();
        let (a, b) = (p.alpha(), p.beta());
        // basis order on t4 is F, G, H
        assert_ket(
            &d.transport(&basis(&d, 0, "S"), 4).unwrap(),
            &[R * b, a, R * b],
            1e-15,
        );

        let (d, fam) = named_family(NamedFamilyId::Eq26NoBs34, p).unwrap();
        let w = born_probabilities(&d, &fam, DEFAULT_CONSISTENCY_TOL).unwrap();
        // histories run A2..C2 outer, F4..H4 inner
        let beta2 = p.beta2();
        let want = [
            0.0,
            alpha2,
            0.0, // A2 with F, G, H
            0.0,
            0.0,
            beta2 / 2.0, // B2
            beta2 / 2.0,
            0.0,
            0.0, // C2
        ];
        // oracle from hand-written straight-through matrices
        let steps = no_bs34_steps(alpha2);
        for (i, h) in fam.histories().iter().enumerate() {
            let mut events = vec![None; 5];
            events[2] = Some(h.events()[0].matrix_rows());
            events[4] = Some(h.events()[1].matrix_rows());
            let v = chain_oracle(&steps, &[c(1.0), c(0.0), c(0.0)], &events);
            let oracle: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((oracle - want[i]).abs() < 1e-15, "history {i}");
            assert!((w[i] - want[i]).abs() < 1e-14, "history {i}");
        }
    }
}

trait Rows {
    fn matrix_rows(&self) -> Mat;
}

impl Rows for Projector {
    fn matrix_rows(&self) -> Mat {
        let m = self.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }
}

#[test]
fn chain_kets_match_dense_oracle_for_every_named_family() {
    for alpha2 in [0.2, 1.0 / 3.0, 0.75] {
        let steps = mzi_steps(alpha2);
        let straight = no_bs34_steps(alpha2);
        for id in NamedFamilyId::ALL {
            let (d, fam) = named_family(id, params(alpha2)).unwrap();
            let steps = if id == NamedFamilyId::Eq26NoBs34 {
                &straight
            } else {
                &steps
            };
            for h in fam.histories() {
                let mut events = vec![None; 5];
                for p in h.events() {
                    events[p.time_index()] = Some(p.matrix_rows());
                }
                let oracle = chain_oracle(steps, &[c(1.0), c(0.0), c(0.0)], &events);
                let got = chain_ket(&d, fam.initial(), h).unwrap();
                for (x, y) in got.amplitudes().iter().zip(&oracle) {
                    assert!((x - y).norm() <= 1e-12, "{id}: {h}");
                }
            }
        }
    }
}

#[test]
fn consistency_examples() {
    for alpha2 in ALPHA_GRID {
        let p = params(alpha2);
        let (d, fa) = named_family(NamedFamilyId::FA, p).unwrap();
        assert!(
            consistency_check(&d, &fa, DEFAULT_CONSISTENCY_TOL)
                .unwrap()
                .consistent
        );
    }
    let p = BeamSplitterParams::special();
    let (d, fb) = named_family(NamedFamilyId::FB, p).unwrap();
    let r = consistency_check(&d, &fb, DEFAULT_CONSISTENCY_TOL).unwrap();
    assert!(!r.consistent);
    assert!((r.max_overlap - 2.0 / 9.0).abs() < 1e-14);
    let (_, _, ip) = r.offending_pairs[0];
    assert!((ip - c(-2.0 / 9.0)).norm() < 1e-14);

    let (d, fc) = named_family(NamedFamilyId::FC, p).unwrap();
    assert!(
        consistency_check(&d, &fc, DEFAULT_CONSISTENCY_TOL)
            .unwrap()
            .consistent
    );
}

#[test]
fn born_examples() {
    for alpha2 in ALPHA_GRID {
        let p = params(alpha2);
        let beta2 = p.beta2();
        let (d, fam) = named_family(NamedFamilyId::Eq8Full, p).unwrap();
        let w = born_probabilities(&d, &fam, DEFAULT_CONSISTENCY_TOL).unwrap();
        assert!((w[0] - alpha2 * alpha2).abs() < 1e-14);
        assert!(w[1].abs() < 1e-14);
        assert!((w[2] - (beta2 + alpha2 * beta2)).abs() < 1e-14);

        let (d, fam) = named_family(NamedFamilyId::FAPrime, p).unwrap();
        let w = born_probabilities(&d, &fam, DEFAULT_CONSISTENCY_TOL).unwrap();
        let nonzero: Vec<_> = w.iter().enumerate().filter(|(_, &x)| x > 1e-14).collect();
        assert_eq!(nonzero.len(), 1);
        let (i, &weight) = nonzero[0];
        assert_eq!(fam.history_label(i), "S0 ⊙ A1 ⊙ A2 ⊙ A3 ⊙ F4");
        assert!((weight - alpha2 * alpha2).abs() < 1e-14);
    }
    let (d, fc) = named_family(NamedFamilyId::FC, BeamSplitterParams::special()).unwrap();
    let w = born_probabilities(&d, &fc, DEFAULT_CONSISTENCY_TOL).unwrap();
    assert!((w[0] - 1.0 / 9.0).abs() < 1e-14);
    assert!(w[1].abs() < 1e-14);
}

#[test]
fn conditional_examples() {
    let p = params(0.3);
    let (d, fa) = named_family(NamedFamilyId::FA, p).unwrap();
    let f4 = proj(&d, 4, &["F"]);
    let pr = |q: &[&str]| {
        conditional_probability(
            &d,
            &fa,
            &[f4.clone()],
            &[proj(&d, 2, q)],
            DEFAULT_CONSISTENCY_TOL,
        )
        .unwrap()
    };
    assert!((pr(&["A"]) - 1.0).abs() < 1e-14);
    assert!(pr(&["B", "C"]).abs() < 1e-14);

    let (d, fc) = named_family(NamedFamilyId::FC, BeamSplitterParams::special()).unwrap();
    let f4 = proj(&d, 4, &["F"]);
    let pc = conditional_probability(
        &d,
        &fc,
        &[f4],
        &[proj(&d, 2, &["C"])],
        DEFAULT_CONSISTENCY_TOL,
    )
    .unwrap();
    assert!((pc - 1.0).abs() < 1e-12);
}

#[test]
fn single_framework_rule_enforced() {
    // F_A cannot answer a question about C2 alone
    let (d, fa) = named_family(NamedFamilyId::FA, params(0.5)).unwrap();
    let err = conditional_probability(
        &d,
        &fa,
        &[proj(&d, 4, &["F"])],
        &[proj(&d, 2, &["C"])],
        DEFAULT_CONSISTENCY_TOL,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotExpressible { time: 2, .. }));
}

#[test]
fn refinement_examples() {
    let p = BeamSplitterParams::special();
    let (d, fa) = named_family(NamedFamilyId::FA, p).unwrap();
    let split = refine(
        &fa,
        2,
        &[proj(&d, 2, &["B"]), proj(&d, 2, &["C"])],
        DEFAULT_TOL,
    )
    .unwrap();
    assert_eq!(split.len(), 3);
    let (_, fabc) = named_family(NamedFamilyId::FAbc, p).unwrap();
    let labels: Vec<_> = (0..3).map(|i| split.history_label(i)).collect();
    let want: Vec<_> = (0..3).map(|i| fabc.history_label(i)).collect();
    assert_eq!(labels, want);
    assert!(
        !consistency_check(&d, &split, DEFAULT_CONSISTENCY_TOL)
            .unwrap()
            .consistent
    );

    let (d, fc) = named_family(NamedFamilyId::FC, p).unwrap();
    let e3 = proj(&d, 3, &["E"]);
    let refined = refine(&fc, 3, &[e3.clone(), e3.complement()], DEFAULT_TOL).unwrap();
    assert_eq!(refined.len(), 4);
    assert!(
        !consistency_check(&d, &refined, DEFAULT_CONSISTENCY_TOL)
            .unwrap()
            .consistent
    );

    // E3 in F_A refined at t3 stays consistent and gives zero
    let (d, fa) = named_family(NamedFamilyId::FA, p).unwrap();
    let refined = refine(&fa, 3, &[e3.clone(), e3.complement()], DEFAULT_TOL).unwrap();
    let pr = conditional_probability(
        &d,
        &refined,
        &[proj(&d, 4, &["F"])],
        &[e3],
        DEFAULT_CONSISTENCY_TOL,
    )
    .unwrap();
    assert!(pr.abs() < 1e-14);
}

#[test]
fn infer_examples() {
    let p = params(0.25);
    let d = build_nested_mzi(p).unwrap();
    let s0 = basis(&d, 0, "S");
    let f4 = proj(&d, 4, &["F"]);
    let v = infer(&d, &s0, &f4, &proj(&d, 2, &["A"]), DEFAULT_CONSISTENCY_TOL).unwrap();
    assert!((v.probability().unwrap() - 1.0).abs() < 1e-14);

    match infer(&d, &s0, &f4, &proj(&d, 2, &["C"]), DEFAULT_CONSISTENCY_TOL).unwrap() {
        InferenceVerdict::Incommensurate(r) => {
            // (beta^2/2)(alpha^2 - beta^2/2) = (3/8)(-1/8)
            let (_, _, ip) = r.offending_pairs[0];
            assert!((ip - c(-3.0 / 64.0)).norm() < 1e-15);
        }
        v => panic!("expected incommensurate, got {v:?}"),
    }

    let v = infer(&d, &s0, &f4, &proj(&d, 3, &["E"]), DEFAULT_CONSISTENCY_TOL).unwrap();
    assert!(v.probability().unwrap().abs() < 1e-14);
}

#[test]
fn f_c_consistent_only_at_one_third() {
    // overlap (beta^2/2)|alpha^2 - beta^2/2| vanishes only at alpha^2 = 1/3
    let mut zeros = Vec::new();
    for i in 1..1000 {
        let alpha2 = i as f64 / 1000.0;
        let (d, fc) = named_family(NamedFamilyId::FC, params(alpha2)).unwrap();
        let r = consistency_check(&d, &fc, DEFAULT_CONSISTENCY_TOL).unwrap();
        let beta2 = 1.0 - alpha2;
        let closed = (beta2 / 2.0) * (alpha2 - beta2 / 2.0).abs();
        assert!((r.max_overlap - closed).abs() < 1e-14);
        if r.consistent {
            zeros.push(alpha2);
        }
    }
    assert!(zeros.is_empty(), "grid excludes 1/3 exactly: {zeros:?}");
    let (d, fc) = named_family(NamedFamilyId::FC, BeamSplitterParams::special()).unwrap();
    assert!(
        consistency_check(&d, &fc, DEFAULT_CONSISTENCY_TOL)
            .unwrap()
            .consistent
    );
}

#[test]
fn f_b_never_consistent() {
    for i in 1..1000 {
        let alpha2 = i as f64 / 1000.0;
        let (d, fb) = named_family(NamedFamilyId::FB, params(alpha2)).unwrap();
        let r = consistency_check(&d, &fb, DEFAULT_CONSISTENCY_TOL).unwrap();
        let beta2 = 1.0 - alpha2;
        assert!(!r.consistent);
        assert!((r.max_overlap - (beta2 / 2.0) * (alpha2 + beta2 / 2.0)).abs() < 1e-14);
    }
}

#[test]
fn presence_table_at_special_parameters() {
    let d = build_nested_mzi(BeamSplitterParams::special()).unwrap();
    let s0 = basis(&d, 0, "S");
    let f4 = basis(&d, 4, "F");
    let channels: Vec<_> = (1..=3)
        .flat_map(|t| Pdi::channels(&d.slices()[t]).into_parts())
        .collect();
    let rows = presence_table(&d, &s0, &f4, &channels, DEFAULT_CONSISTENCY_TOL).unwrap();
    let verdicts: Vec<_> = rows
        .iter()
        .map(|r| (r.channel.as_str(), r.tsvf, r.ch))
        .collect();
    use PresenceVerdict::*;
    assert_eq!(
        verdicts,
        vec![
            ("A1", Present, Present),
            ("D1", Absent, Absent),
            ("Q1", Absent, Absent),
            ("A2", Present, Present),
            ("B2", Present, Meaningless),
            // at alpha^2 = 1/3 the C2 weak value is exactly 1
            ("C2", Present, Present),
            ("A3", Present, Present),
            ("E3", Absent, Absent),
            ("H3", Absent, Absent),
        ]
    );
}
