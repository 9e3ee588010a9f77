mod common;

use htmot_core::idt::{Forest, NodePath, TokenInstance};
use htmot_core::sampler::draw::gather_descent;
use htmot_core::{Checkpoint, HyperParams, Trainer};

fn params(iterations: u64) -> HyperParams {
    HyperParams {
        alpha: 0.5,
        beta: 0.5,
        iterations,
        sgi: 6,
        batch_size: 7,
        ..common::small_params()
    }
}

#[test]
fn same_seed_same_run() {
    let corpus = common::random_corpus(11, 30, 40, 25);
    let a = htmot_core::train(&corpus, params(10), 5).unwrap();
    let b = htmot_core::train(&corpus, params(10), 5).unwrap();
    assert_eq!(a.forest.assignments(), b.forest.assignments());
    assert_eq!(a.state, b.state);
    assert_eq!(a.forest.dump(), b.forest.dump());
    let c = htmot_core::train(&corpus, params(10), 6).unwrap();
    assert_ne!(a.forest.assignments(), c.forest.assignments());
}

#[test]
fn resume_is_bit_identical() {
    let corpus = common::random_corpus(12, 30, 40, 25);
    let full = htmot_core::train(&corpus, params(12), 9).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt.json");
    let mut first = Trainer::new(&corpus, params(12), 9).unwrap();
    first.run_for(5).unwrap();
    first.checkpoint().save(&path).unwrap();
    drop(first);
    let mut resumed = Trainer::resume(&corpus, Checkpoint::load(&path).unwrap()).unwrap();
    resumed.forest().audit().unwrap();
    resumed.run().unwrap();
    let resumed = resumed.into_model();
    assert_eq!(resumed.forest.assignments(), full.forest.assignments());
    assert_eq!(resumed.forest.node_meta(), full.forest.node_meta());
    assert_eq!(resumed.forest.dump(), full.forest.dump());
    assert_eq!(resumed.state, full.state);
}

#[test]
fn no_growth_after_stop_iteration() {
    let corpus = common::random_corpus(13, 30, 40, 25);
    let model = htmot_core::train(&corpus, params(14), 2).unwrap();
    for s in &model.state.history {
        // Stats carry the 1-based batch number.
        if s.iteration > 6 {
            assert_eq!(s.created, 0, "iteration {}", s.iteration);
        }
    }
    assert!(model.state.growth_frozen);
    model.forest.audit().unwrap();
}

#[test]
fn trained_forest_passes_audit() {
    let corpus = common::random_corpus(14, 40, 60, 30);
    let model = htmot_core::train(&corpus, params(20), 3).unwrap();
    model.forest.audit().unwrap();
    for (row, doc) in model.forest.assignments().iter().zip(&corpus.documents) {
        assert_eq!(row.len(), doc.len());
    }
}

/// Descent weights at a depth-1 node with three children, against counts
/// taken straight from the assignment list.
#[test]
fn descent_weights_match_counts() {
    let docs: Vec<(i64, Vec<&str>)> = (0..6)
        .map(|i| (i * 10, vec!["a", "b", "c", "a", "d", "e", "a", "b", "f", "c"]))
        .collect();
    let docs: Vec<(i64, &[&str])> = docs.iter().map(|(d, w)| (*d, w.as_slice())).collect();
    let corpus = common::corpus(&docs);
    let params = HyperParams {
        critical_mass: 0.001,
        splitting_mass: 0.001,
        ..HyperParams::default()
    };
    let mut forest = Forest::new(&corpus, &params);
    let tokens = common::tokens(&corpus);
    let top = forest.create_child(&NodePath::root(), false).unwrap();
    for t in &tokens {
        forest.assign(*t, &top).unwrap();
    }
    forest.sweep_ttl(&corpus);
    let mut children = Vec::new();
    for k in 0..3 {
        let c = forest.create_child(&top, false).unwrap();
        for t in tokens.iter().filter(|t| (t.doc * 7 + t.pos) % 4 == k) {
            forest.unassign(*t);
            forest.assign(*t, &c).unwrap();
        }
        forest.sweep_ttl(&corpus);
        children.push(c);
    }
    forest.audit().unwrap();

    let v = corpus.vocab_len() as f64;
    let (phi, eps) = (params.phi, params.epsilon);
    for probe in [0usize, 5, 9, 23, 41] {
        let token = tokens[probe];
        forest.unassign(token);
        let rows = forest.assignments();
        let count = |f: &dyn Fn(usize, usize, &NodePath) -> bool| -> f64 {
            let mut n = 0;
            for (d, row) in rows.iter().enumerate() {
                for (p, a) in row.iter().enumerate() {
                    if let Some(a) = a {
                        if f(d, p, a) {
                            n += 1;
                        }
                    }
                }
            }
            n as f64
        };
        let word = |d: usize, p: usize| corpus.documents[d].tokens[p];
        let strict = |x: &NodePath| {
            let x = x.clone();
            move |_: usize, _: usize, a: &NodePath| *a == x
        };
        let own_w = count(&|d, p, a| strict(&top)(d, p, a) && word(d, p) == token.word);
        let own_d = count(&|d, p, a| strict(&top)(d, p, a) && d == token.doc);
        let own_n = count(&strict(&top));
        let expected_parent = (own_w + phi) * (own_d + eps) / (own_n + phi * v);
        let mut expected_children = 0.0;
        for c in &children {
            let w = count(&|d, p, a| a.starts_with(c) && word(d, p) == token.word);
            let dn = count(&|d, _, a| a.starts_with(c) && d == token.doc);
            let n = count(&|_, _, a| a.starts_with(c));
            expected_children += (w + phi) * (dn + eps) / (n + phi * v);
        }
        let got = gather_descent(&forest, &token, &top, &params, corpus.vocab_len());
        assert!((got.parent - expected_parent).abs() < 1e-12 * expected_parent);
        assert!((got.children - expected_children).abs() < 1e-12 * expected_children);
        assert!((got.new_child - eps / v).abs() < 1e-15);
        let (t1, t2) = params.bernoulli_prior();
        let p = (expected_parent + t1) / (eps / v + t1 + t2 + expected_children + expected_parent);
        assert!((got.stop_probability((t1, t2)) - p).abs() < 1e-12);
        forest.assign(token, &top).unwrap();
    }
}

#[test]
fn frozen_empty_forest_is_an_error() {
    let corpus = common::random_corpus(15, 3, 10, 5);
    let params = HyperParams { sgi: 0, ..params(1) };
    let mut trainer = Trainer::new(&corpus, params, 1).unwrap();
    assert!(trainer.step().is_err());
    let _ = TokenInstance::of(&corpus, 0, 0);
}
