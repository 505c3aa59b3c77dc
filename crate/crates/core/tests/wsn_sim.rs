use proptest::prelude::*;
use qwsn::teleport::ProtocolVariant;
use qwsn::wsn::{allocate, chi_square_uniform, star_links, Deployment, NodeId, WsnError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair_link(pairs: usize, variant: ProtocolVariant) -> (Deployment, NodeId, NodeId) {
    let nodes = vec![NodeId::from("A"), NodeId::from("BS")];
    let links = star_links(&nodes, &nodes[1]);
    let d = allocate(&nodes, &links, pairs, variant).unwrap();
    (d, nodes[0].clone(), nodes[1].clone())
}

#[test]
fn thousand_bits_arrive_intact() {
    for variant in ProtocolVariant::ALL {
        let (mut d, a, bs) = pair_link(1000, variant);
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        let sent: Vec<u8> = (0..1000).map(|_| rng.random_range(0..=1)).collect();
        let received: Vec<u8> = sent
            .iter()
            .map(|&b| d.send_key_bit(&a, &bs, b, &mut rng).unwrap())
            .collect();
        assert_eq!(sent, received);
        assert_eq!(d.total_unused(), 0);
        assert!(matches!(
            d.send_key_bit(&a, &bs, 0, &mut rng),
            Err(WsnError::PairsExhausted { .. })
        ));
    }
}

#[test]
fn classical_log_is_uniform_for_each_key_bit() {
    let n_per_bit = 20_000;
    let (mut d, a, bs) = pair_link(2 * n_per_bit, ProtocolVariant::Feynman);
    let mut rng = ChaCha8Rng::seed_from_u64(40_000);
    for k in 0..2 * n_per_bit {
        d.send_key_bit(&a, &bs, (k % 2) as u8, &mut rng).unwrap();
    }
    let hist = d.audit_classical_channel();
    let p = 0.25;
    let sigma = (p * (1.0 - p) / n_per_bit as f64).sqrt();
    for bit in [0u8, 1] {
        let counts = hist.counts[&bit];
        assert_eq!(counts.iter().sum::<usize>(), n_per_bit);
        for &count in &counts {
            let freq = count as f64 / n_per_bit as f64;
            assert!((freq - p).abs() <= 4.0 * sigma, "bit {bit}: {counts:?}");
        }
        let (_, pval) = chi_square_uniform(&counts);
        assert!(pval >= 0.001, "bit {bit}: p={pval}");
    }
}

#[derive(Debug, Clone)]
enum Op {
    Send(usize, u8),
    Key(usize, usize),
    Compromise(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..3, 0u8..2).prop_map(|(n, b)| Op::Send(n, b)),
        (0usize..3, 0usize..6).prop_map(|(n, l)| Op::Key(n, l)),
        (0usize..4).prop_map(Op::Compromise),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn consumption_is_monotone(ops in proptest::collection::vec(op(), 1..40), seed in any::<u64>()) {
        let labels = ["A", "B", "C", "BS"];
        let nodes: Vec<NodeId> = labels.iter().map(|&l| NodeId::from(l)).collect();
        let hub = nodes[3].clone();
        let per_link = 6;
        let mut d = allocate(&nodes, &star_links(&nodes, &hub), per_link, ProtocolVariant::Toffoli).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let consumed = |d: &Deployment| -> Vec<usize> { d.inventories().map(|i| i.consumed()).collect() };
        let mut last = consumed(&d);
        for op in ops {
            match op {
                Op::Send(n, b) => {
                    if let Ok(r) = d.send_key_bit(&nodes[n], &hub, b, &mut rng) {
                        prop_assert_eq!(r, b);
                    }
                }
                Op::Key(n, l) => {
                    if let Ok(k) = d.distribute_key(&nodes[n], &hub, l, &mut rng) {
                        prop_assert_eq!(&k.bits_sent, &k.bits_received);
                        prop_assert_eq!(k.pairs_consumed, l);
                    }
                }
                Op::Compromise(n) => {
                    let leak = d.compromise(&nodes[n]).unwrap();
                    prop_assert_eq!(leak.exposed_past_bits, 0);
                    for (link, count) in &leak.leaked_unused_pairs {
                        let (x, y) = link.endpoints();
                        prop_assert_eq!(*count, d.inventory(x, y).unwrap().unused());
                    }
                }
            }
            let now = consumed(&d);
            for (before, after) in last.iter().zip(&now) {
                prop_assert!(after >= before);
                prop_assert!(*after <= per_link);
            }
            prop_assert_eq!(d.classical_log().len(), d.total_consumed());
            last = now;
        }
    }
}
