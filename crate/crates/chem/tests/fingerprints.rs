use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use retroplan_chem::{canonicalize, default_fingerprint, parse_smiles, tanimoto, Fingerprint};

/// Frozen output; any change to hashing or invariants breaks persisted
/// indexes and must show up here.
#[test]
fn cenobamate_bits_are_frozen() {
    let m = parse_smiles("NC(=O)OC(Cn1ncnn1)c1ccccc1Cl").unwrap();
    let bits: Vec<u32> = default_fingerprint(&m).positions().collect();
    assert_eq!(
        bits,
        vec![
            23, 33, 97, 223, 301, 353, 373, 384, 448, 475, 543, 548, 573, 745, 846, 860, 880, 899, 913, 928, 935,
            970, 972, 973, 1111, 1186, 1194, 1295, 1321, 1332, 1351, 1408, 1460, 1533, 1537, 1551, 1578, 1664,
            1759, 1787, 1834, 1856, 1879
        ]
    );
}

#[test]
fn equal_canonical_forms_give_equal_bits() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for line in include_str!("data/druglike.tsv").lines().skip(1).take(80) {
        let smiles = line.split('\t').next().unwrap();
        let m = parse_smiles(smiles).unwrap();
        let fp = default_fingerprint(&m);
        let canon = canonicalize(smiles).unwrap();
        assert_eq!(default_fingerprint(&canon.to_mol()), fp, "{smiles}");
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        order.shuffle(&mut rng);
        assert_eq!(default_fingerprint(&m.permuted(&order)), fp, "{smiles}");
    }
}

fn fingerprint() -> impl Strategy<Value = Fingerprint> {
    proptest::collection::btree_set(0u32..256, 0..40).prop_map(|bits| Fingerprint::from_positions(256, 2, bits))
}

proptest! {
    #[test]
    fn tanimoto_is_symmetric_and_bounded(a in fingerprint(), b in fingerprint()) {
        let ab = tanimoto(&a, &b).unwrap();
        prop_assert_eq!(ab, tanimoto(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let inter = a.positions().filter(|p| b.contains(*p)).count() as f64;
        let union = a.union(&b).unwrap().count_ones() as f64;
        if union > 0.0 {
            prop_assert!((ab - inter / union).abs() < 1e-12);
        }
    }
}
