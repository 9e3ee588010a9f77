mod common;

use htmot_core::idt::{Forest, NodePath, TokenInstance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Snapshot = Vec<(NodePath, u64, u64, u64, u64, bool, u32, u32)>;

fn snapshot(f: &Forest) -> Snapshot {
    let mut out = Vec::new();
    f.walk(|p, n| {
        out.push((
            p.clone(),
            n.total(),
            n.stop_total(),
            n.beta().rho1.to_bits(),
            n.beta().rho2.to_bits(),
            n.valid(),
            n.ttl_remaining(),
            n.next_child_index(),
        ))
    });
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn audit_holds_under_random_operations(seed in any::<u64>()) {
        let corpus = common::random_corpus(seed, 12, 30, 20);
        let mut forest = Forest::new(&corpus, &common::small_params());
        common::churn(&mut forest, &corpus, 400, seed, 1);
    }

    #[test]
    fn unassign_inverts_assign(seed in any::<u64>()) {
        let corpus = common::random_corpus(seed, 10, 25, 15);
        let mut forest = Forest::new(&corpus, &common::small_params());
        common::churn(&mut forest, &corpus, 300, seed, 0);
        let free: Vec<TokenInstance> = common::tokens(&corpus)
            .into_iter()
            .filter(|t| forest.assignment(t.doc, t.pos).is_none())
            .collect();
        let live = common::live_paths(&forest);
        prop_assume!(!free.is_empty() && !live.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let before = snapshot(&forest);
        for _ in 0..20 {
            let tok = free[rng.random_range(0..free.len())];
            let path = &live[rng.random_range(0..live.len())];
            forest.assign(tok, path).unwrap();
            prop_assert_eq!(forest.unassign(tok), Some(path.clone()));
            prop_assert_eq!(&snapshot(&forest), &before);
        }
    }

    #[test]
    fn sweep_never_leaves_overdue_invalid_nodes(seed in any::<u64>()) {
        let corpus = common::random_corpus(seed, 10, 25, 15);
        let params = common::small_params();
        let mut forest = Forest::new(&corpus, &params);
        common::churn(&mut forest, &corpus, 200, seed, 0);
        forest.sweep_ttl(&corpus);
        let mut ok = true;
        forest.walk(|_, n| {
            if !n.valid() && (n.ttl_remaining() == 0 || n.ttl_remaining() > params.ttl) {
                ok = false;
            }
            if n.valid() && n.ttl_remaining() != params.ttl {
                ok = false;
            }
        });
        prop_assert!(ok);
        forest.audit().unwrap();
    }
}
