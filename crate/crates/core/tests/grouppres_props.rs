use afm_core::grouppres::{
    abelian_invariants, first_betti, relation_matrix, AbelianInvariants, Presentation, Word,
};
use afm_core::linalg::rank;
use proptest::prelude::*;

const NGENS: usize = 4;

fn word_strategy() -> impl Strategy<Value = Word> {
    prop::collection::vec((0..NGENS, -3i64..=3), 0..6).prop_map(Word::from_syllables)
}

fn presentation_strategy() -> impl Strategy<Value = Presentation> {
    prop::collection::vec(word_strategy(), 0..5).prop_map(|rels| {
        let gens = ["a", "b", "c", "d"].map(String::from).to_vec();
        Presentation::new(gens, rels).unwrap()
    })
}

fn commutator(i: usize, j: usize) -> Word {
    Word::from_syllables([(i, 1), (j, 1), (i, -1), (j, -1)])
}

proptest! {
    #[test]
    fn invariant_under_relator_reordering(p in presentation_strategy(), seed in any::<u64>()) {
        let mut rels = p.relators().to_vec();
        if !rels.is_empty() {
            let k = (seed as usize) % rels.len();
            rels.rotate_left(k);
            rels.reverse();
        }
        let q = p.with_relators(rels).unwrap();
        prop_assert_eq!(abelian_invariants(&p), abelian_invariants(&q));
    }

    #[test]
    fn invariant_under_inversion_and_cyclic_permutation(p in presentation_strategy(), k in 0usize..8) {
        let rels: Vec<Word> = p
            .relators()
            .iter()
            .enumerate()
            .map(|(i, w)| if i % 2 == 0 { w.inverse() } else { w.rotate(k) })
            .collect();
        let q = p.with_relators(rels).unwrap();
        prop_assert_eq!(abelian_invariants(&p), abelian_invariants(&q));
    }

    #[test]
    fn invariant_under_generator_renaming(p in presentation_strategy()) {
        let renamed = p
            .with_generator_names(["x1", "y_2", "Z", "w"].map(String::from).to_vec())
            .unwrap();
        prop_assert_eq!(abelian_invariants(&p), abelian_invariants(&renamed));
        // and through the text format
        let reparsed: Presentation = renamed.to_string().parse().unwrap();
        prop_assert_eq!(abelian_invariants(&p), abelian_invariants(&reparsed));
    }

    #[test]
    fn adding_commutators_changes_nothing(p in presentation_strategy(), i in 0..NGENS, j in 0..NGENS) {
        let mut rels = p.relators().to_vec();
        rels.push(commutator(i, j));
        let q = p.with_relators(rels).unwrap();
        prop_assert_eq!(abelian_invariants(&p), abelian_invariants(&q));
    }

    #[test]
    fn free_rank_is_generators_minus_rank(p in presentation_strategy()) {
        let inv = abelian_invariants(&p);
        prop_assert_eq!(inv.free_rank, NGENS - rank(&relation_matrix(&p)));
        prop_assert_eq!(inv.free_rank, first_betti(&p));
        for t in &inv.torsion {
            prop_assert!(*t >= 2.into());
        }
        for w in inv.torsion.windows(2) {
            prop_assert!(num_integer::Integer::is_multiple_of(&w[1], &w[0]));
        }
    }
}

#[test]
fn no_relators_gives_free_abelian() {
    for n in 1..=5 {
        let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let p = Presentation::new(names, vec![]).unwrap();
        assert_eq!(
            abelian_invariants(&p),
            AbelianInvariants {
                free_rank: n,
                torsion: vec![]
            }
        );
    }
}

#[test]
fn c2_relation_matrix_by_direct_exponent_counting() {
    let p: Presentation = "< t1,t2,t3,al | [t1,t2], [t1,t3], [t2,t3], al^2 = t1, \
                           al*t2*al^-1 = t2^-1, al*t3*al^-1 = t3^-1 >"
        .parse()
        .unwrap();
    // al^2 t1^-1 ; al t2 al^-1 t2 ; al t3 al^-1 t3
    let expected_rows = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 2], [0, 2, 0, 0], [0, 0, 2, 0]];
    let m = relation_matrix(&p);
    for (i, row) in expected_rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            assert_eq!(m[(i, j)], x.into(), "entry ({i},{j})");
        }
    }
}
