use proptest::prelude::*;
use torsion_core::geometry::synth::{build_chain, place_atom, ResidueSpec};
use torsion_core::geometry::{compute_torsions, dihedral, parse_pdb, write_pdb, Vec3};

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn rotate(p: Vec3, axis: Vec3, theta: f64) -> Vec3 {
    // Rodrigues' rotation formula; `axis` must be a unit vector.
    let (s, c) = theta.sin_cos();
    let k = axis;
    let kxp = [k[1] * p[2] - k[2] * p[1], k[2] * p[0] - k[0] * p[2], k[0] * p[1] - k[1] * p[0]];
    let kdp = k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
    [0, 1, 2].map(|i| p[i] * c + kxp[i] * s + k[i] * kdp * (1.0 - c))
}

fn unit(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

fn point() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-10.0f64..10.0)
}

/// Quadruples whose dihedral is well defined.
fn quad() -> impl Strategy<Value = [Vec3; 4]> {
    (point(), point(), point(), point())
        .prop_map(|(a, b, c, d)| [a, b, c, d])
        .prop_filter("non-degenerate", |q| dihedral(q[0], q[1], q[2], q[3]).is_ok_and(|_| well_conditioned(q)))
}

fn well_conditioned(q: &[Vec3; 4]) -> bool {
    let sub = |a: Vec3, b: Vec3| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let cross = |a: Vec3, b: Vec3| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let norm = |a: Vec3| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let (b1, b2, b3) = (sub(q[1], q[0]), sub(q[2], q[1]), sub(q[3], q[2]));
    norm(b2) > 0.1 && norm(cross(b1, b2)) > 0.1 && norm(cross(b2, b3)) > 0.1
}

#[test]
fn planar_cis_and_trans() {
    let cis = dihedral([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]).unwrap();
    let trans = dihedral([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 1.0, 0.0]).unwrap();
    assert!(cis.abs() < 1e-9, "{cis}");
    assert!((trans - 180.0).abs() < 1e-9, "{trans}");
}

#[test]
fn right_hand_rotation_gives_positive_angle() {
    // Rotating the cis fourth atom by +60° about the p2→p3 axis.
    let p4 = rotate([1.0, 1.0, 0.0], [0.0, 1.0, 0.0], 60f64.to_radians());
    let d = dihedral([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0], p4).unwrap();
    assert!((d - 60.0).abs() < 1e-9, "{d}");
    let expected = [0.5, 1.0, -(3f64.sqrt()) / 2.0];
    assert!(p4.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn collinear_is_degenerate() {
    assert!(dihedral([0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 1.0, 0.0]).is_err());
    assert!(dihedral([0.0; 3], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 1.0, 0.0]).is_err());
}

#[test]
fn ideal_trans_peptide_omega() {
    let specs: Vec<_> = ['G', 'A', 'S'].iter().map(|&c| ResidueSpec::new(c, -60.0, 140.0, 180.0)).collect();
    let atoms = build_chain('A', 1, &specs);
    let chains = compute_torsions("TRI", &atoms);
    for r in &chains[0].residues[1..] {
        assert!(angle_diff(r.omega.unwrap(), 180.0) < 5.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rigid_motion_invariance(q in quad(), axis in point(), theta in -3.2f64..3.2, shift in point()) {
        prop_assume!(axis.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let k = unit(axis);
        let before = dihedral(q[0], q[1], q[2], q[3]).unwrap();
        let m = q.map(|p| {
            let r = rotate(p, k, theta);
            [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]]
        });
        let after = dihedral(m[0], m[1], m[2], m[3]).unwrap();
        prop_assert!(angle_diff(before, after) < 1e-6, "{before} vs {after}");
    }

    #[test]
    fn reversal_is_symmetric_mirror_is_antisymmetric(q in quad()) {
        let d = dihedral(q[0], q[1], q[2], q[3]).unwrap();
        // Reading the quadruple backwards leaves the angle unchanged.
        let rev = dihedral(q[3], q[2], q[1], q[0]).unwrap();
        prop_assert!(angle_diff(d, rev) < 1e-6);
        let mirror = q.map(|p| [-p[0], p[1], p[2]]);
        let m = dihedral(mirror[0], mirror[1], mirror[2], mirror[3]).unwrap();
        prop_assert!(angle_diff(d, -m) < 1e-6);
    }

    #[test]
    fn range_is_half_open(q in quad()) {
        let d = dihedral(q[0], q[1], q[2], q[3]).unwrap();
        prop_assert!(d > -180.0 && d <= 180.0);
    }

    #[test]
    fn placement_recovers_torsion(t in -179.9f64..180.0) {
        let (a, b, c) = ([0.2, -1.1, 0.4], [1.0, 0.0, 0.0], [2.1, 0.5, 0.3]);
        let d = place_atom(a, b, c, 1.5, 112.0, t);
        prop_assert!(angle_diff(dihedral(a, b, c, d).unwrap(), t) < 1e-9);
    }

    #[test]
    fn pdb_round_trip_keeps_torsions(
        angles in prop::collection::vec((-170.0f64..170.0, -170.0f64..170.0), 3..12)
    ) {
        let specs: Vec<_> = angles.iter().map(|&(phi, psi)| ResidueSpec::new('A', phi, psi, 180.0)).collect();
        let atoms = build_chain('B', 5, &specs);
        let text = write_pdb(&atoms);
        let parsed = parse_pdb(&text).unwrap();
        prop_assert_eq!(parsed.len(), atoms.len());
        let chains = compute_torsions("RND", &parsed);
        prop_assert_eq!(chains.len(), 1);
        let residues = &chains[0].residues;
        prop_assert_eq!(residues.len(), specs.len());
        prop_assert_eq!(residues[0].residue_seq, 5);
        for (i, r) in residues.iter().enumerate() {
            if i > 0 {
                prop_assert!(angle_diff(r.phi.unwrap(), specs[i].phi) < 0.5);
            }
            if i + 1 < residues.len() {
                prop_assert!(angle_diff(r.psi.unwrap(), specs[i].psi) < 0.5);
            }
        }
    }
}
