//! Lower envelopes of segments and their DS transcripts.
use dslab::envelope::{envelope_stats, lower_envelope, Segment, Q};
use dslab::sequence::ds_order;

fn q(p: i64) -> Q {
    Q::from_integer(p.into())
}

fn main() {
    // a long shallow segment and a short deep one
    let segs = vec![
        Segment { x1: Some(q(0)), x2: Some(q(10)), a: q(0), b: q(0) },
        Segment { x1: Some(q(4)), x2: Some(q(6)), a: q(0), b: q(-1) },
    ];
    let t = lower_envelope(&segs).unwrap().transcript();
    println!("transcript {:?}, breakpoints {:?}", t.sequence(), t.breakpoints.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    for row in envelope_stats(200, 5, 1).unwrap() {
        println!("n {} length {} order {} bound {}", row.n, row.length, row.order, row.bound);
    }
    let lines: Vec<Segment> = (0..6).map(|k| Segment::line(q(k), q(-k * k))).collect();
    let seq = lower_envelope(&lines).unwrap().transcript().sequence();
    println!("lines: {seq:?}, order {}", ds_order(&seq));
}
