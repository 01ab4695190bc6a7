use dynsc::apps::{DynamicER, ErConfig};
use dynsc::generate::{gen_snake, gen_stream, gnp, read_stream, write_stream, StreamKind};
use dynsc::harness::{run, Algo, Mode, RunConfig};
use dynsc::oracle::{exact_er, laplacian};
use dynsc::MultiGraph;

#[test]
fn serialized_inputs_replay_identically() {
    let g = gnp(25, 0.3, true, 3);
    let ops = gen_stream(StreamKind::QueryHeavy, &g, 120, 3);

    let mut gbuf = Vec::new();
    g.write(&mut gbuf).unwrap();
    let mut sbuf = Vec::new();
    write_stream(&ops, &mut sbuf).unwrap();
    let g2 = MultiGraph::read(&gbuf[..]).unwrap();
    let ops2 = read_stream(&sbuf[..]).unwrap();
    assert_eq!(ops, ops2);

    let mut cfg = RunConfig::new(Mode::Er, Algo::Dynamic, 0.5, 9);
    cfg.c_rho = 4.0;
    cfg.oracle = true;
    let a = run(&cfg, &g, None, &ops).unwrap();
    let b = run(&cfg, &g2, None, &ops2).unwrap();
    let bits = |r: &dynsc::harness::Report| r.rows.iter().map(|x| x.answer.map(f64::to_bits)).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.summary.hard_failures, 0);
    assert!(a.summary.pass_rate() >= 0.9, "{}", a.summary.pass_rate());
}

#[test]
fn snake_resistance_between_far_endpoints() {
    // Weights alternate 1 and n^10, so the answer is dominated by the light edges.
    let n = 10;
    let g = gen_snake(n);
    let exact = exact_er(&laplacian(&g), 0, n - 1).unwrap();
    let mut cfg = ErConfig::new(0.5, 0.5, 1);
    cfg.schur.c_rho = 4.0;
    let mut er = DynamicER::new(g, cfg).unwrap();
    let got = er.query(0, n - 1).unwrap();
    assert!((got - exact).abs() <= 0.5 * exact, "{got} vs {exact}");
}
