mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::select;

use specmon::analysis::{context_free_probe, group_to_special, rational_member, MembershipResult, Nfa, ProbeVerdict};
use specmon::graph::{classify_ends, end_isomorphic, end_space, rooted_iso, LabelledGraph};
use specmon::pieces::{compute_piece_table, factor_relator};
use specmon::presentations::check_no_unit_proper_subword;
use specmon::rewriting::{common_ancestor, reduce_once, word_problem};
use specmon::schutz::{cayley_ball, condensation, stephen_ball};
use specmon::treecons::tree_of_copies;
use specmon::units::build_units_graph;
use specmon::{parse_presentation, Alphabet, Budget, EqualityVerdict, SpecialPresentation, Strategy as EqStrategy, Word};

use common::*;

fn corpus_name() -> impl Strategy<Value = &'static str> {
    select(FIXTURES.to_vec())
}

fn word_over(n: usize, max: usize) -> impl Strategy<Value = Word> {
    vec(0..n as u16, 0..=max)
}

fn presentation() -> impl Strategy<Value = SpecialPresentation> {
    (1usize..=4, vec(vec(0u16..4, 1..=6), 0..=3)).prop_map(|(k, rels)| {
        let alphabet = Alphabet::new(["a", "b", "ā", "c"].into_iter().take(k)).unwrap();
        let rels = rels.into_iter().map(|r| r.into_iter().map(|x| x % k as u16).collect()).collect();
        SpecialPresentation::new(alphabet, rels, None).unwrap()
    })
}

fn random_graph() -> impl Strategy<Value = (usize, usize, Vec<(usize, u16, usize)>)> {
    (1usize..=12, 1usize..=3).prop_flat_map(|(n, k)| {
        let tree = (1..n).map(move |v| (0..v, 0..k as u16).prop_map(move |(u, a)| (u, a, v))).collect::<Vec<_>>();
        (Just(n), Just(k), tree, vec((0..n, 0..k as u16, 0..n), 0..2 * n)).prop_map(|(n, k, mut t, extra)| {
            t.extend(extra);
            (n, k, t)
        })
    })
}

fn fit(p: &SpecialPresentation, w: Word) -> Word {
    w.into_iter().map(|x| x % p.alphabet.len() as u16).collect()
}

fn graph_of(n: usize, k: usize, edges: &[(usize, u16, usize)]) -> LabelledGraph {
    LabelledGraph::from_edges((0..k).map(|i| format!("x{i}")).collect(), n, edges, Some(0))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn text_and_json_round_trip(p in presentation()) {
        prop_assert_eq!(&parse_presentation(&p.to_text()).unwrap(), &p);
        let j = serde_json::to_string(&p.to_json()).unwrap();
        prop_assert_eq!(&SpecialPresentation::from_json(&j).unwrap(), &p);
    }

    #[test]
    fn normalize_is_idempotent(name in corpus_name(), w in word_over(6, 14)) {
        let p = load(name);
        let o = oracle(&p);
        let rs = o.system().unwrap();
        let w = fit(&p, w);
        let nf = rs.normalize(&w).unwrap();
        prop_assert!(rs.is_irreducible(&nf));
        prop_assert_eq!(rs.normalize(&nf).unwrap(), nf.clone());
        let (nf2, d) = rs.normalize_with_derivation(&w).unwrap();
        prop_assert_eq!(&nf2, &nf);
        prop_assert!(d.replay_in(&p).is_ok());
    }

    #[test]
    fn random_reduction_orders_agree(name in corpus_name(), w in word_over(6, 14), choices in vec(any::<usize>(), 64)) {
        let p = load(name);
        let rs = oracle(&p).system().unwrap().clone();
        let w = fit(&p, w);
        let nf = rs.normalize(&w).unwrap();
        let mut cur = w.clone();
        let mut k = 0;
        loop {
            let redexes: Vec<(usize, usize)> = rs.rules().iter().enumerate()
                .flat_map(|(i, r)| (0..=cur.len().saturating_sub(r.lhs.len())).filter(|&j| cur[j..].starts_with(&r.lhs)).map(move |j| (i, j)))
                .collect();
            if redexes.is_empty() {
                break;
            }
            let (i, j) = redexes[choices[k % choices.len()] % redexes.len()];
            k += 1;
            let r = &rs.rules()[i];
            cur.splice(j..j + r.lhs.len(), r.rhs.iter().copied());
        }
        prop_assert_eq!(cur, nf);
    }

    #[test]
    fn bounded_equal_implies_complete_equal(name in corpus_name(), base in word_over(6, 4), ins in vec((0usize..8, 0usize..8), 0..3), del in vec(0usize..8, 0..3)) {
        let p = load(name);
        let rs = oracle(&p).system().unwrap().clone();
        let base = fit(&p, base);
        let v = scrambled_product(&p, std::slice::from_ref(&base), &[0], &ins, &del);
        let bounded = word_problem(&base, &v, &p, &EqStrategy::Bounded(Budget { max_len: 10, max_steps: 8 })).unwrap();
        let complete = word_problem(&base, &v, &p, &EqStrategy::Complete(rs)).unwrap();
        prop_assert!(complete.is_equal());
        if let EqualityVerdict::Equal(d) = bounded {
            prop_assert!(d.replay_in(&p).is_ok());
            let w = common_ancestor(&d, &p).unwrap();
            prop_assert!(deletes_to(&p, &w, &base));
            prop_assert!(deletes_to(&p, &w, &v));
        }
    }

    #[test]
    fn fold_is_idempotent_and_shrinks((n, k, edges) in random_graph()) {
        let g = graph_of(n, k, &edges);
        let (f, map) = g.fold();
        prop_assert!(f.num_vertices() <= g.num_vertices() && f.num_edges() <= g.num_edges());
        prop_assert!(f.is_deterministic().is_ok());
        for (u, a, v) in g.edges() {
            prop_assert!(f.has_edge(map[u], a, map[v]));
        }
        let (ff, _) = f.fold();
        prop_assert!(rooted_iso(&f, &ff).is_some());
    }

    #[test]
    fn fold_ignores_edge_order((n, k, edges) in random_graph(), perm in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = edges.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm));
        let (f1, _) = graph_of(n, k, &edges).fold();
        let (f2, _) = graph_of(n, k, &shuffled).fold();
        prop_assert!(rooted_iso(&f1, &f2).is_some());
    }

    #[test]
    fn lud_keeps_distances((n, k, edges) in random_graph()) {
        let g = graph_of(n, k, &edges);
        let l = g.lud();
        prop_assert_eq!(g.distances(0), l.distances(0)[..n].to_vec());
    }

    #[test]
    fn regex_and_json_nfas_agree(re in select(vec!["(bc)*", "b(bc)*", "b|c", "(b|c)*c", "bb*c*", ""]), w in word_over(2, 8)) {
        let a = Alphabet::new(["b", "c"]).unwrap();
        let n = Nfa::from_regex(re, &a).unwrap();
        let back = Nfa::from_json(&serde_json::to_string(&n.to_json(&a)).unwrap(), &a).unwrap();
        prop_assert_eq!(n.accepts(&w), back.accepts(&w));
    }

    #[test]
    fn rational_yes_witnesses_replay(re in select(vec!["(bc)*", "b(bc)*", "c*b*", "(b|c)(bc)*", "bbc"]), w in word_over(2, 5)) {
        let p = load("bicyclic.mon");
        let o = oracle(&p);
        let n = Nfa::from_regex(re, &p.alphabet).unwrap();
        match rational_member(&o, &n, &w, 5) {
            MembershipResult::Yes { witness, derivation } => {
                prop_assert!(n.accepts(&witness));
                prop_assert!(derivation.replay_in(&p).is_ok());
                prop_assert_eq!(&derivation.start, &witness);
                prop_assert_eq!(derivation.end(), &w);
            }
            MembershipResult::NoWithinBound { .. } => {}
            MembershipResult::Aborted { .. } => prop_assert!(false, "complete system cannot abort"),
        }
    }

    #[test]
    fn group_powers_and_commutators(n in 1usize..6) {
        let p = group_to_special(&format!("Gp<a,b | a^{n}, [a,b]>")).unwrap();
        prop_assert_eq!(p.alphabet.len(), 4);
        prop_assert!(p.relators.iter().any(|r| r.len() == n && r.iter().all(|&x| x == r[0])));
        let o = oracle(&p);
        let a = p.word("a").unwrap();
        let an: Word = a.repeat(n);
        prop_assert_eq!(o.canonical(&an), Some(Word::new()));
    }
}

#[test]
fn unit_subword_violations_are_the_recorded_ones() {
    for name in FIXTURES {
        let p = load(name);
        let v = check_no_unit_proper_subword(&p, Budget::default());
        for x in &v {
            assert!(x.witness.replay_in(&p).is_ok());
            assert_eq!(x.witness.start, p.relators[x.relator][x.start..x.end].to_vec());
            assert!(x.witness.end().is_empty());
        }
        let spans: Vec<_> = v.iter().map(|x| (x.relator, x.start, x.end)).collect();
        if *name == "b-abc.mon" {
            assert_eq!(spans, vec![(1, 1, 2)], "{name}");
        } else {
            assert!(spans.is_empty(), "{name}: {spans:?}");
        }
    }
}

#[test]
fn piece_factorisations_and_class_witnesses() {
    for name in FIXTURES {
        let p = load(name);
        let o = oracle(&p);
        let pt = compute_piece_table(&o).unwrap();
        for (i, r) in p.relators.iter().enumerate() {
            let f = factor_relator(i, &o).unwrap();
            assert_eq!(&f.concat(), r, "{name}");
            assert_eq!(f, pt.factorizations[i]);
        }
        for (a, b, d) in &pt.class_witnesses {
            d.replay_in(&p).unwrap();
            assert_eq!(d.start, pt.pieces[*a].word);
            assert_eq!(d.end(), &pt.pieces[*b].word);
        }
    }
}

#[test]
fn units_graph_is_deterministic() {
    for name in FIXTURES {
        let p = load(name);
        let o = oracle(&p);
        let pt = compute_piece_table(&o).unwrap();
        let u = build_units_graph(&o, &pt, 3).unwrap();
        assert!(u.graph.is_deterministic().is_ok(), "{name}");
    }
}

#[test]
fn stephen_balls_grow_monotonically() {
    for name in FIXTURES {
        let p = load(name);
        for r in 0..4 {
            let small = stephen_ball(&p, r, 2).unwrap();
            let big = stephen_ball(&p, r + 1, 2).unwrap();
            let (cut, _) = big.graph.ball(r).unwrap();
            assert!(rooted_iso(&small.graph, &cut).is_some(), "{name} r={r}");
        }
    }
}

#[test]
fn corpus_condensations_are_acyclic() {
    for name in FIXTURES {
        let o = oracle(&load(name));
        let ball = cayley_ball(&o, 4).unwrap();
        let rep = condensation(&ball, 2);
        assert!(rep.acyclic, "{name}");
        assert!(rep.unique_entering(), "{name}: {:?}", rep.entering);
    }
}

#[test]
fn end_isomorphism_is_an_equivalence() {
    let o = oracle(&load("bicyclic.mon"));
    let g = cayley_ball(&o, 9).unwrap().graph;
    let d = g.root_distances().unwrap();
    let ends: Vec<_> = (0..g.num_vertices()).filter(|&v| d[v].is_some_and(|x| (1..=5).contains(&x))).map(|v| end_space(&g, v).unwrap()).collect();
    let iso = |i: usize, j: usize| end_isomorphic(&g, &ends[i], &g, &ends[j], 2).unwrap();
    for i in 0..ends.len() {
        assert!(iso(i, i));
        for j in 0..ends.len() {
            assert_eq!(iso(i, j), iso(j, i));
            for k in 0..ends.len() {
                if iso(i, j) && iso(j, k) {
                    assert!(iso(i, k));
                }
            }
        }
    }
}

#[test]
fn tree_of_a_finite_graph_is_context_free() {
    let g = LabelledGraph::from_edges(vec!["a".into(), "b".into(), "c".into()], 3, &[(0, 0, 1), (1, 1, 2), (2, 2, 0)], Some(0));
    let t = tree_of_copies(&g, &[1, 2], 12, 10).unwrap();
    let rep = classify_ends(&t.graph, 6, 2).unwrap();
    assert!(rep.stabilized, "{:?}", rep.counts);
}

#[test]
fn probes_never_disagree_on_the_corpus() {
    for name in FIXTURES {
        let p = load(name);
        let o = oracle(&p);
        let pt = compute_piece_table(&o).unwrap();
        let rep = context_free_probe(&o, &pt, 7, 1);
        if *name == "zxz.mon" {
            assert_eq!(rep.verdict, ProbeVerdict::InconsistentAtThisScale);
        } else {
            assert_ne!(rep.verdict, ProbeVerdict::Disagreement, "{name}");
        }
    }
}

#[test]
fn leftmost_reduction_matches_normalize() {
    let p = load("babcb.mon");
    let rs = oracle(&p).system().unwrap().clone();
    let mut w = p.word("bbabcbabcbbcab").unwrap();
    while let Some((next, _, _)) = reduce_once(&w, &rs) {
        w = next;
    }
    assert_eq!(w, rs.normalize(&p.word("bbabcbabcbbcab").unwrap()).unwrap());
}
