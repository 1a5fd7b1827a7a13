//! Step through the merge loop by hand and compare the recursively carried
//! variance estimators with a direct evaluation over every pixel.

use agglothresh::oracle::naive_variances;
use agglothresh::{build_initial, find_min_pair, merge_step, Histogram};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = Histogram::from_pairs(256, [(1, 2), (2, 2), (5, 1)])?;
    let mut classes = build_initial(&h);
    let mut v = 0.0;
    let mut w = classes.between_variance().expect("three classes");
    println!("K=3  v=0  w={w:.6}  grand mean {:.3}", classes.grand_mean());

    let mut history = Vec::new();
    while classes.len() > 1 {
        let l = find_min_pair(&classes)?;
        let (next, rec) = merge_step(&classes, v, w)?;
        assert_eq!(l, rec.left_index);
        history.push(rec);
        let (direct_v, direct_w) = naive_variances(&next, &h, &history)?;
        println!(
            "merge at {l} (cut {}): d²={:.4}  v={:.6} (direct {:.6})  w={} (direct {})  q={}",
            rec.boundary_gray,
            rec.d_sq,
            rec.v,
            direct_v,
            fmt(rec.w),
            fmt(direct_w),
            fmt(rec.q),
        );
        v = rec.v;
        w = rec.w.unwrap_or(f64::NAN);
        classes = next;
    }
    Ok(())
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |x| format!("{x:.6}"))
}
