//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use image::{Rgb, RgbImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use v2r::diagnostics::{
    alignment_gap, cluster_stats, decode_feature, loss_and_gradient, probe_accuracy,
    read_vmat_checked, read_vocab, softmax, train_linear_probe, Matrix, Params, ProbeConfig,
};
use v2r::harness::{
    run_eval, write_outputs, AnswerParser, Endpoint, EndpointError, EvalOptions, PromptTable,
    Request,
};
use v2r::metrics::{
    consistency, path_metrics, point_accuracy, positional_accuracy_curve, region_bias,
    semantic_stability_vectors, token_stability,
};
use v2r::model::{
    read_manifest, Anchor, CampaignConfig, Direction, GroundTruth, PlotRange, Point, Variation,
};
use v2r::synth::{
    count_occurrences, gen_text_matrix, parse_matrix, plan_coordinate, plan_path,
    plan_text_matrix, render_coordinate, render_path, style, CoordinateTaskSpec, PathTaskSpec,
};
use v2r::variation::{apply_variation, object_box, placeholder, remap_direction_label, BackgroundBank};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() < tol, || format!("{what}: {a} vs {b} (|d| = {:e})", (a - b).abs()))
}

// ---------------------------------------------------------------- oracles

fn oracle_consistency(v: &[f64]) -> f64 {
    // Welford running variance
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, x) in v.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    1.0 - (m2 / v.len() as f64).sqrt()
}

fn oracle_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn oracle_semantic(vs: &[Vec<f64>]) -> f64 {
    let n = vs.len();
    let mut s = 0.0;
    for a in vs {
        for b in vs {
            s += oracle_cos(a, b);
        }
    }
    s / (n * n) as f64
}

fn oracle_token(sets: &[HashSet<String>]) -> f64 {
    let n = sets.len();
    let mut s = 0.0;
    for a in sets {
        for b in sets {
            let union = a.union(b).count();
            s += if union == 0 { 1.0 } else { a.intersection(b).count() as f64 / union as f64 };
        }
    }
    s / (n * n) as f64
}

fn oracle_path(pred: Option<&[Point]>, gt: &[Point]) -> (f64, f64, f64) {
    let Some(pred) = pred else { return (0.0, 0.0, 0.0) };
    let n = gt.len();
    let (mut sa, mut ia) = (0, 0);
    for i in 0..n {
        if let Some(p) = pred.get(i) {
            if *p == gt[i] {
                sa += 1;
            }
            if gt.contains(p) {
                ia += 1;
            }
        }
    }
    let ema = if pred == gt { 1.0 } else { 0.0 };
    (ema, ia as f64 / n as f64, sa as f64 / n as f64)
}

fn oracle_region(map: &[Vec<f64>]) -> (f64, f64) {
    let g = map.len();
    let middle = |i: usize| {
        let c = (i as f64 + 0.5) / g as f64;
        c >= 1.0 / 3.0 - 1e-12 && c <= 2.0 / 3.0 + 1e-12
    };
    let (mut m, mut mn, mut s, mut sn) = (0.0, 0, 0.0, 0);
    for (y, row) in map.iter().enumerate() {
        for (x, v) in row.iter().enumerate() {
            if middle(x) && middle(y) {
                m += v;
                mn += 1;
            } else {
                s += v;
                sn += 1;
            }
        }
    }
    (m / mn as f64, s / sn as f64)
}

fn oracle_alignment(h: &[Vec<f64>], c: &[Vec<f64>]) -> (f64, f64) {
    let n = h.len();
    let (mut matched, mut other) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                matched += oracle_cos(&h[i], &c[j]);
            } else {
                other += oracle_cos(&h[i], &c[j]);
            }
        }
    }
    (matched / n as f64, other / (n * (n - 1)) as f64)
}

fn oracle_clusters(x: &[Vec<f64>], labels: &[String]) -> (f64, f64) {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if labels[i] == labels[j] {
                intra += dist(&x[i], &x[j]);
                ni += 1;
            } else {
                inter += dist(&x[i], &x[j]);
                nx += 1;
            }
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    (mean(intra, ni), mean(inter, nx))
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f32>> {
    (0..n)
        .map(|_| loop {
            let r: Vec<f32> = (0..d).map(|_| rng.gen_range(-2.0f32..2.0)).collect();
            if r.iter().any(|v| v.abs() > 1e-3) {
                break r;
            }
        })
        .collect()
}

fn widen(rows: &[Vec<f32>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect()
}

fn random_path(rng: &mut ChaCha8Rng, len: std::ops::Range<usize>) -> Vec<Point> {
    let len = rng.gen_range(len);
    (0..len).map(|_| Point::new2(rng.gen_range(0..3), rng.gen_range(0..3))).collect()
}

// ---------------------------------------------------------------- criteria

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tol = 1e-9;
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64, what: &str| -> Result<(), String> {
        worst = worst.max((a - b).abs());
        close(a, b, tol, what)
    };
    for _ in 0..1000 {
        let n = rng.gen_range(1..8);
        let v: Vec<f64> = if rng.gen_bool(0.1) {
            vec![rng.gen(); n]
        } else {
            (0..n).map(|_| rng.gen()).collect()
        };
        track(consistency(&v).unwrap(), oracle_consistency(&v), "C_m")?;

        let n = rng.gen_range(1..6);
        let d = rng.gen_range(1..6);
        let vs = widen(&random_rows(&mut rng, n, d));
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        track(semantic_stability_vectors(&ids, &vs).unwrap(), oracle_semantic(&vs), "S_s")?;

        let alphabet = ["a", "b", "c", "d", "e", "f"];
        let n = rng.gen_range(1..6);
        let texts: Vec<Vec<&str>> = (0..n)
            .map(|_| (0..rng.gen_range(0..5)).map(|_| *alphabet.choose(&mut rng).unwrap()).collect())
            .collect();
        let joined: Vec<String> = texts.iter().map(|t| t.join(", ")).collect();
        let sets: Vec<HashSet<String>> =
            texts.iter().map(|t| t.iter().map(|s| s.to_string()).collect()).collect();
        track(token_stability(&joined).unwrap(), oracle_token(&sets), "S_t")?;

        let gt = random_path(&mut rng, 1..6);
        let pred = (!rng.gen_bool(0.1)).then(|| random_path(&mut rng, 0..8));
        let e = path_metrics(pred.as_deref(), &gt).unwrap();
        let (ema, ia, sa) = oracle_path(pred.as_deref(), &gt);
        track(e.ema, ema, "EMA")?;
        track(e.pm_ia, ia, "PM-IA")?;
        track(e.pm_sa, sa, "PM-SA")?;

        let m = rng.gen_range(1..10);
        let gts: Vec<Point> = (0..m).map(|_| Point::new2(rng.gen_range(0..3), rng.gen_range(0..3))).collect();
        let preds: Vec<Option<Point>> = (0..m)
            .map(|_| rng.gen_bool(0.9).then(|| Point::new2(rng.gen_range(0..3), rng.gen_range(0..3))))
            .collect();
        let pa = preds.iter().zip(&gts).filter(|(p, g)| p.as_ref() == Some(*g)).count() as f64 / m as f64;
        track(point_accuracy(&preds, &gts).unwrap(), pa, "PA")?;

        let samples: Vec<(Option<Vec<Point>>, Vec<Point>)> = (0..rng.gen_range(1..6))
            .map(|_| {
                let g = random_path(&mut rng, 1..6);
                let p = rng.gen_bool(0.9).then(|| random_path(&mut rng, 0..7));
                (p, g)
            })
            .collect();
        let view: Vec<(Option<&[Point]>, &[Point])> =
            samples.iter().map(|(p, g)| (p.as_deref(), g.as_slice())).collect();
        let curve = positional_accuracy_curve(&view);
        for (i, c) in curve.iter().enumerate() {
            let with_i: Vec<_> = samples.iter().filter(|(_, g)| g.len() > i).collect();
            let hits = with_i
                .iter()
                .filter(|(p, g)| p.as_ref().and_then(|p| p.get(i)) == Some(&g[i]))
                .count();
            track(*c, hits as f64 / with_i.len() as f64, "positional accuracy")?;
        }

        let g = rng.gen_range(3..9);
        let map: Vec<Vec<f64>> = (0..g).map(|_| (0..g).map(|_| rng.gen()).collect()).collect();
        let rb = region_bias(&map).unwrap();
        let (mid, sur) = oracle_region(&map);
        track(rb.middle.unwrap(), mid, "region middle")?;
        track(rb.surrounding.unwrap(), sur, "region surrounding")?;

        let n = rng.gen_range(2..7);
        let d = rng.gen_range(1..6);
        let (h, c) = (random_rows(&mut rng, n, d), random_rows(&mut rng, n, d));
        let gap = alignment_gap(&Matrix::from_rows(&h).unwrap(), &Matrix::from_rows(&c).unwrap()).unwrap();
        let (m, mm) = oracle_alignment(&widen(&h), &widen(&c));
        track(gap.mean_matched_cosine, m, "matched cosine")?;
        track(gap.mean_mismatched_cosine, mm, "mismatched cosine")?;
        track(gap.gap, m - mm, "alignment gap")?;

        let n = rng.gen_range(2..9);
        let x = random_rows(&mut rng, n, d);
        let mut labels: Vec<String> = (0..n).map(|_| format!("l{}", rng.gen_range(0..3))).collect();
        // at least two classes
        labels[0] = "l0".into();
        labels[1] = "l1".into();
        let cs = cluster_stats(&Matrix::from_rows(&x).unwrap(), &labels).unwrap();
        let (intra, inter) = oracle_clusters(&widen(&x), &labels);
        track(cs.intra_class_mean_dist, intra, "intra distance")?;
        track(cs.inter_class_mean_dist, inter, "inter distance")?;
        track(cs.ratio, if inter == 0.0 { 0.0 } else { intra / inter }, "cluster ratio")?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("1000 draws x 9 metrics, max |d| = {worst:.1e}, {secs:.2} s"))
}

fn hand_anchors() -> Outcome {
    let tol = 1e-12;
    close(consistency(&[1.0, 0.0]).unwrap(), 0.5, tol, "consistency")?;
    close(token_stability(&["x y", "y z"]).unwrap(), 2.0 / 3.0, tol, "token stability")?;
    let ortho = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    close(semantic_stability_vectors(&["a", "b"], &ortho).unwrap(), 0.5, tol, "semantic stability")?;
    let gt = [Point::new2(1, 1), Point::new2(2, 2), Point::new2(3, 3)];
    let pred = [Point::new2(1, 1), Point::new2(3, 3), Point::new2(2, 2)];
    let e = path_metrics(Some(&pred[..]), &gt).unwrap();
    close(e.ema, 0.0, tol, "EMA")?;
    close(e.pm_ia, 1.0, tol, "PM-IA")?;
    close(e.pm_sa, 1.0 / 3.0, tol, "PM-SA")?;
    Ok("C_m 0.5, S_t 2/3, S_s 0.5, path (0, 1, 1/3)".into())
}

fn metric_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let gt = random_path(&mut rng, 1..7);
        let pred = random_path(&mut rng, 0..9);
        let e = path_metrics(Some(&pred[..]), &gt).unwrap();
        ensure(e.ema <= e.pm_sa && e.pm_sa <= e.pm_ia, || format!("{pred:?} vs {gt:?}: {e:?}"))?;
    }
    for v in [2usize, 3, 5] {
        let texts: Vec<String> = (0..v).map(|i| format!("tok{i}a tok{i}b")).collect();
        close(token_stability(&texts).unwrap(), 1.0 / v as f64, 1e-12, "disjoint S_t")?;
    }
    for _ in 0..10_000 {
        let n = rng.gen_range(1..6);
        let base: f64 = rng.gen();
        let mut v = vec![base; n];
        let equal = n == 1 || rng.gen_bool(0.5);
        if !equal {
            let i = rng.gen_range(0..n);
            // sometimes only one ulp apart
            v[i] = if rng.gen_bool(0.5) { rng.gen() } else { f64::from_bits(base.to_bits() + 1).min(1.0) };
        }
        let all_equal = v.iter().all(|x| *x == v[0]);
        let c = consistency(&v).unwrap();
        ensure((c == 1.0) == all_equal, || format!("{v:?} -> {c}"))?;
    }
    Ok("10k path pairs ordered; S_t = 1/|V| for 2, 3, 5; C_m = 1 iff equal on 10k vectors".into())
}

fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, String>) {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, format!("{:x}", Sha256::digest(std::fs::read(&p).unwrap())));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn gen_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("gen.toml");
    std::fs::write(
        &config,
        "grid = 3\nscales = [0.2, 0.1]\nrotations = [0.0, 90.0]\ncontexts = [\"white\", \"sky\"]\nclasses = [\"cat\", \"car\"]\n",
    )
    .unwrap();
    let tasks = "object,direction,coordinate,path,text-matrix,ocr";
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_v2r"))
            .args(["gen", "--task", tasks, "--seed", "7", "--preset", "smoke", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        trees.push(hash_tree(&out));
    }
    ensure(trees[0] == trees[1], || "file hashes differ between runs".into())?;
    let records = read_manifest(&tmp.path().join("a/manifest.jsonl")).unwrap();
    let mut per_task: BTreeMap<String, usize> = BTreeMap::new();
    for r in &records {
        *per_task.entry(r.task.to_string()).or_default() += 1;
    }
    ensure(per_task.len() == 6, || format!("tasks present: {per_task:?}"))?;
    Ok(format!(
        "{} files identical across runs incl. manifest {}..; records {per_task:?}",
        trees[0].len(),
        &trees[0]["manifest.jsonl"][..12]
    ))
}

fn blobs(img: &RgbImage, color: Rgb<u8>) -> Vec<(f64, f64)> {
    let (w, h) = img.dimensions();
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if seen[(y * w + x) as usize] || *img.get_pixel(x, y) != color {
                continue;
            }
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
            let mut stack = vec![(x, y)];
            seen[(y * w + x) as usize] = true;
            while let Some((px, py)) = stack.pop() {
                sx += px as f64 + 0.5;
                sy += py as f64 + 0.5;
                n += 1.0;
                for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (qx, qy) = (px as i64 + dx, py as i64 + dy);
                    if qx < 0 || qy < 0 || qx >= w as i64 || qy >= h as i64 {
                        continue;
                    }
                    let (qx, qy) = (qx as u32, qy as u32);
                    let k = (qy * w + qx) as usize;
                    if !seen[k] && *img.get_pixel(qx, qy) == color {
                        seen[k] = true;
                        stack.push((qx, qy));
                    }
                }
            }
            if n >= 20.0 {
                out.push((sx / n, sy / n));
            }
        }
    }
    out
}

fn ground_truth_fidelity() -> Outcome {
    // direction labels: remapping agrees with rotating the pointing vector
    for d in Direction::CLOCKWISE {
        for k in 0..8 {
            let theta = (k as f64 * 45.0).to_radians();
            let (x, y) = d.vector();
            // clockwise on screen with y pointing down
            let r = (x * theta.cos() - y * theta.sin(), x * theta.sin() + y * theta.cos());
            let nearest = Direction::CLOCKWISE
                .into_iter()
                .max_by(|a, b| {
                    let dot = |q: Direction| q.vector().0 * r.0 + q.vector().1 * r.1;
                    dot(*a).total_cmp(&dot(*b))
                })
                .unwrap();
            let got = remap_direction_label(d, k as f64 * 45.0).unwrap();
            ensure(got == nearest, || format!("{d} by {}: {got} vs {nearest}", k * 45))?;
            for j in 0..8 {
                let two = remap_direction_label(got, j as f64 * 45.0).unwrap();
                let once = remap_direction_label(d, ((k + j) % 8) as f64 * 45.0).unwrap();
                ensure(two == once, || format!("group law fails for {d}, {k}, {j}"))?;
            }
        }
    }

    let canvas = (672u32, 672u32);
    let bg = BackgroundBank::new().resolve("white").unwrap();
    let mut assets = placeholder::object_assets();
    assets.push(placeholder::arrow_asset());
    let mut worst_px = 0i64;
    for s in [1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 10.0, 1.0 / 15.0, 1.0 / 20.0] {
        for a in &assets {
            let v = Variation {
                position: Anchor { x: 336.0, y: 336.0 },
                scale: s,
                rotation: 0.0,
                context: "white".into(),
            };
            let task = if a.key() == "arrow" { v2r::model::Task::Direction } else { v2r::model::Task::Object };
            let (img, _) = apply_variation(a, &bg, &v, canvas, task).unwrap();
            let side = object_box(&img, Rgb([255, 255, 255])).unwrap().longer_side() as i64;
            let want = (s * 672.0).round() as i64;
            worst_px = worst_px.max((side - want).abs());
            ensure((side - want).abs() <= 1, || format!("{} at s={s}: {side} px vs {want}", a.label()))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let range = PlotRange::STANDARD[rng.gen_range(0..4)];
        let spec = CoordinateTaskSpec::sample(rng.gen_range(1..=2), range, rng.gen(), rng.gen(), &mut rng);
        let img = render_coordinate(&spec).unwrap();
        let found = blobs(&img, style::POINT);
        ensure(found.len() == 1, || format!("{} markers for {:?}", found.len(), spec.point))?;
        let frame = spec.frame();
        let p: Vec<f64> = spec.point.0.iter().map(|v| *v as f64).collect();
        let expect = frame.to_pixel(&p);
        let err = (found[0].0 - expect.0).hypot(found[0].1 - expect.1);
        worst = worst.max(err);
        let back: Vec<i64> = frame.to_data(found[0]).iter().map(|v| v.round() as i64).collect();
        ensure(err <= 1.0 && back == spec.point.0, || format!("{:?}: {back:?}, {err:.2} px", spec.point))?;
    }
    for _ in 0..100 {
        let range = PlotRange::STANDARD[rng.gen_range(0..4)];
        let spec = PathTaskSpec::sample(rng.gen_range(2..=6), range, &mut rng);
        let img = render_path(&spec).unwrap();
        let frame = spec.frame();
        let invert = |c: (f64, f64)| -> (Point, f64) {
            let d = frame.to_data(c);
            let p = Point::new2(d[0].round() as i64, d[1].round() as i64);
            let px = frame.to_pixel(&[p.0[0] as f64, p.0[1] as f64]);
            (p, (px.0 - c.0).hypot(px.1 - c.1))
        };
        let start = blobs(&img, style::START);
        ensure(start.len() == 1, || format!("{} start markers", start.len()))?;
        let (p0, e0) = invert(start[0]);
        worst = worst.max(e0);
        ensure(p0 == spec.points[0] && e0 <= 1.0, || format!("start {p0} vs {}", spec.points[0]))?;
        let mut found = HashSet::new();
        for c in blobs(&img, style::VERTEX) {
            let (p, e) = invert(c);
            worst = worst.max(e);
            ensure(e <= 1.0, || format!("vertex {p} off by {e:.2} px"))?;
            found.insert(p);
        }
        let expected: HashSet<Point> = spec.points[1..].iter().filter(|p| **p != spec.points[0]).cloned().collect();
        ensure(found == expected, || format!("vertices {found:?} vs {expected:?}"))?;
    }
    Ok(format!(
        "8x8 remaps + group law; 6 scales x {} assets within {worst_px} px; 200 plots inverted within {worst:.2} px",
        assets.len()
    ))
}

fn campaign_shapes() -> Outcome {
    let cfg = CampaignConfig::default();
    let coord = plan_coordinate(&cfg, 0);
    let mut settings: BTreeMap<(i64, i64, u8, bool, bool), usize> = BTreeMap::new();
    for j in &coord {
        let s = &j.spec;
        *settings.entry((s.range.lo, s.range.hi, s.dims, s.grid, s.reference_lines)).or_default() += 1;
    }
    let mut want = BTreeMap::new();
    for (lo, hi) in [(-5, 5), (-10, 10), (0, 10), (0, 20)] {
        for dims in [1u8, 2] {
            for grid in [false, true] {
                for refs in [false, true] {
                    want.insert((lo, hi, dims, grid, refs), 100usize);
                }
            }
        }
    }
    ensure(settings == want, || format!("coordinate settings {settings:?}"))?;

    let path = plan_path(&cfg, 0);
    let mut by: BTreeMap<(usize, i64, i64), usize> = BTreeMap::new();
    for j in &path {
        *by.entry((j.spec.points.len(), j.spec.range.lo, j.spec.range.hi)).or_default() += 1;
    }
    ensure(path.len() == 2000 && by.len() == 20 && by.values().all(|c| *c == 100), || {
        format!("path plan {} records over {by:?}", path.len())
    })?;

    let text = plan_text_matrix(&cfg, 0);
    let sizes: HashSet<usize> = text.iter().map(|j| j.spec.size).collect();
    ensure(sizes == HashSet::from([8, 16, 24, 32, 40, 64]), || format!("sizes {sizes:?}"))?;
    for j in &text {
        let (body, record) = gen_text_matrix(&j.spec, j.seed, &j.id).unwrap();
        let grid = parse_matrix(&body);
        ensure(grid.len() == j.spec.size && grid.iter().all(|r| r.len() == j.spec.size), || {
            format!("{} is not {}x{}", j.id, j.spec.size, j.spec.size)
        })?;
        ensure(count_occurrences(&grid, &j.spec.word) == 1, || format!("{}: target repeats", j.id))?;
        let placed: String = grid[j.spec.row][j.spec.col..j.spec.col + j.spec.word.len()].iter().collect();
        ensure(placed == j.spec.word, || format!("{}: target not at its position", j.id))?;
        ensure(
            matches!(&record.ground_truth, GroundTruth::TextMatrix { count: 1, .. }),
            || format!("{}: ground truth {:?}", j.id, record.ground_truth),
        )?;
    }
    Ok(format!(
        "coordinate 4x2x2x2 settings x 100 = {}; path 5x4x100 = {}; text {} matrices, each target unique",
        coord.len(),
        path.len(),
        text.len()
    ))
}

fn decode_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_norm = 0.0f64;
    for _ in 0..1000 {
        let v = rng.gen_range(2..40);
        let d = rng.gen_range(1..12);
        let e = Matrix::from_rows(&random_rows(&mut rng, v, d)).unwrap();
        let vocab: Vec<String> = (0..v).map(|i| format!("t{i}")).collect();
        let h: Vec<f32> = (0..d).map(|_| rng.gen_range(-3.0f32..3.0)).collect();
        let c: f32 = rng.gen_range(0.05..20.0);
        let hc: Vec<f32> = h.iter().map(|x| x * c).collect();
        let k = rng.gen_range(1..=v);
        let a: Vec<usize> = decode_feature(&h, &e, &vocab, k).unwrap().iter().map(|t| t.index).collect();
        let b: Vec<usize> = decode_feature(&hc, &e, &vocab, k).unwrap().iter().map(|t| t.index).collect();
        ensure(a == b, || format!("top-{k} changed under scaling by {c}: {a:?} vs {b:?}"))?;
        let all = decode_feature(&h, &e, &vocab, v).unwrap();
        let total: f64 = all.iter().map(|t| t.probability).sum();
        worst_norm = worst_norm.max((total - 1.0).abs());
        ensure((total - 1.0).abs() <= 1e-6, || format!("probabilities sum to {total}"))?;
        let logits: Vec<f64> = (0..v).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let s: f64 = softmax(&logits).iter().sum();
        ensure((s - 1.0).abs() <= 1e-6, || format!("softmax sums to {s}"))?;
    }
    let v = 12;
    let identity: Vec<Vec<f32>> = (0..v).map(|i| (0..v).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let e = Matrix::from_rows(&identity).unwrap();
    let vocab: Vec<String> = (0..v).map(|i| format!("w{i}")).collect();
    let mut order: Vec<usize> = (0..v).collect();
    order.shuffle(&mut rng);
    let mut h = vec![0f32; v];
    for (rank, idx) in order.iter().enumerate() {
        h[*idx] = (v - rank) as f32;
    }
    let got: Vec<usize> = decode_feature(&h, &e, &vocab, v).unwrap().iter().map(|t| t.index).collect();
    ensure(got == order, || format!("identity fixture {got:?} vs {order:?}"))?;
    Ok(format!("1000 scaling draws stable; max |sum p - 1| = {worst_norm:.1e}; identity order recovered"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn probe_checks() -> Outcome {
    let (x, sidecar) = read_vmat_checked(&fixture("probe_features.vmat")).unwrap();
    let labels = read_vocab(&fixture("probe_labels.txt")).unwrap();
    ensure(x.rows() == 500 && sidecar.is_some(), || format!("fixture {}x{}", x.rows(), x.cols()))?;
    ensure(labels.iter().collect::<HashSet<_>>().len() == 5, || "fixture needs 5 classes".into())?;
    let start = Instant::now();
    let probe = train_linear_probe(&x, &labels, &ProbeConfig::default()).unwrap();
    let acc = probe_accuracy(&probe, &x, &labels).unwrap();
    let secs = start.elapsed().as_secs_f64();
    ensure(acc >= 0.99 && secs < 10.0, || format!("accuracy {acc} in {secs:.2} s"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, d, k) = (30, 4, 3);
    let xs = Matrix::from_rows(&random_rows(&mut rng, n, d)).unwrap();
    let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let p = Params {
        weights: (0..k * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        bias: (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let l2 = 1e-2;
    let (_, grad) = loss_and_gradient(&xs, &y, &p, l2);
    let eps = 1e-6;
    let mut worst = 0.0f64;
    let analytic: Vec<f64> = grad.weights.iter().chain(&grad.bias).copied().collect();
    for (i, g) in analytic.iter().enumerate() {
        let bump = |delta: f64| {
            let mut q = p.clone();
            if i < k * d {
                q.weights[i] += delta;
            } else {
                q.bias[i - k * d] += delta;
            }
            loss_and_gradient(&xs, &y, &q, l2).0
        };
        let numeric = (bump(eps) - bump(-eps)) / (2.0 * eps);
        let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-4, || format!("gradient relative error {worst:e}"))?;

    // 5-fold out-of-fold accuracy with shuffled labels
    let mut shuffled = labels.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(6));
    let folds = 5;
    let mut hits = 0usize;
    for f in 0..folds {
        let (mut tr, mut te) = (Vec::new(), Vec::new());
        for i in 0..x.rows() {
            if i % folds == f { te.push(i) } else { tr.push(i) }
        }
        let pick = |idx: &[usize]| Matrix::from_rows(&idx.iter().map(|i| x.row(*i).to_vec()).collect::<Vec<_>>()).unwrap();
        let ytr: Vec<String> = tr.iter().map(|i| shuffled[*i].clone()).collect();
        let yte: Vec<String> = te.iter().map(|i| shuffled[*i].clone()).collect();
        let probe = train_linear_probe(&pick(&tr), &ytr, &ProbeConfig::default()).unwrap();
        hits += (probe_accuracy(&probe, &pick(&te), &yte).unwrap() * te.len() as f64).round() as usize;
    }
    let chance = hits as f64 / x.rows() as f64;
    ensure((chance - 0.2).abs() <= 0.05, || format!("shuffled-label accuracy {chance}"))?;
    Ok(format!(
        "fixture accuracy {acc:.3} in {secs:.2} s; gradient rel. error {worst:.1e}; shuffled labels {chance:.3}"
    ))
}

/// Answers by looking the attached image up in a table; counts requests.
struct Scripted {
    answers: HashMap<Vec<u8>, String>,
    calls: AtomicUsize,
}

impl Endpoint for Scripted {
    fn model_id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, r: &Request) -> Result<String, EndpointError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = Sha256::digest(r.image_png.as_ref().expect("image attached")).to_vec();
        self.answers.get(&key).cloned().ok_or_else(|| EndpointError::Fatal("unknown image".into()))
    }
}

fn end_to_end_run(dir: &Path) -> Result<serde_json::Value, String> {
    let config = dir.join("e2e.toml");
    std::fs::write(&config, "grid = 3\nscales = [0.2]\nrotations = [0.0, 90.0, 180.0, 270.0]\n").unwrap();
    let data = dir.join("data");
    let args = ["v2r", "gen", "--task", "direction", "--seed", "7", "--config"];
    let code = v2r::cli::main_with_args(
        args.iter().map(|s| s.to_string()).chain([
            config.display().to_string(),
            "--out".into(),
            data.display().to_string(),
        ]),
    );
    ensure(code == 0, || format!("gen exited {code}"))?;
    let manifest = data.join("manifest.jsonl");
    let records = read_manifest(&manifest).unwrap();
    ensure(records.len() == 36, || format!("{} records", records.len()))?;

    // correct at the center anchor and at 0/90 degrees, the opposite direction otherwise
    let mut answers = HashMap::new();
    for r in &records {
        let v = r.variation.as_ref().unwrap();
        let GroundTruth::Direction(gt) = r.ground_truth else { unreachable!() };
        let center = v.position.x == 336.0 && v.position.y == 336.0;
        let answer = if center || v.rotation < 180.0 { gt } else { remap_direction_label(gt, 180.0).unwrap() };
        let png = std::fs::read(data.join(r.image_path.as_ref().unwrap())).unwrap();
        answers.insert(Sha256::digest(&png).to_vec(), answer.to_string());
    }
    let endpoint = Scripted { answers, calls: AtomicUsize::new(0) };
    let run = run_eval(
        &records,
        &data,
        &endpoint,
        &AnswerParser::default(),
        &PromptTable::default(),
        &EvalOptions::default(),
    )
    .unwrap();
    ensure(run.summary.failed == 0 && endpoint.calls.load(Ordering::SeqCst) == 36, || {
        format!("{:?}", run.summary)
    })?;
    let outputs = dir.join("outputs.jsonl");
    write_outputs(&run.outputs, &outputs).unwrap();
    let report = dir.join("report");
    let code = v2r::cli::main_with_args([
        "v2r".to_string(),
        "score".into(),
        "--manifest".into(),
        manifest.display().to_string(),
        "--outputs".into(),
        outputs.display().to_string(),
        "--out".into(),
        report.display().to_string(),
    ]);
    ensure(code == 0, || format!("score exited {code}"))?;
    Ok(serde_json::from_str(&std::fs::read_to_string(report.join("report.json")).unwrap()).unwrap())
}

fn end_to_end_mock() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = end_to_end_run(a.path())?;
    end_to_end_run(b.path())?;
    for f in v2r::report::REPORT_FILES {
        let x = std::fs::read(a.path().join("report").join(f)).unwrap();
        let y = std::fs::read(b.path().join("report").join(f)).unwrap();
        ensure(x == y, || format!("{f} differs between runs"))?;
    }
    let t = &ra["models"]["scripted"]["direction"];
    let num = |v: &serde_json::Value| v.as_f64().unwrap();
    let tol = 1e-12;
    // center anchor 4/4 correct, the eight others 2/4
    close(num(&t["accuracy"]), 20.0 / 36.0, tol, "accuracy")?;
    let pos = &t["dimensions"]["position"];
    close(num(&pos["consistency"]), 1.0 - 2f64.sqrt() / 9.0, tol, "C_m position")?;
    // rotation accuracies 1, 1, 1/9, 1/9
    let rot = &t["dimensions"]["rotation"];
    close(num(&rot["consistency"]), 5.0 / 9.0, tol, "C_m rotation")?;
    // position groups per rotation: two unanimous, two with one dissenting word
    close(num(&pos["token_stability"]), 73.0 / 81.0, tol, "S_t position")?;
    // rotation groups per anchor: center says four words, others two pairs
    close(num(&rot["token_stability"]), 17.0 / 36.0, tol, "S_t rotation")?;
    close(num(&t["region_bias"]["middle"]), 1.0, tol, "region middle")?;
    close(num(&t["region_bias"]["surrounding"]), 0.5, tol, "region surrounding")?;
    Ok("36-record 3x3 manifest: accuracy 5/9, C_m pos 1-sqrt2/9, C_m rot 5/9, S_t 73/81 & 17/36, bias 1.0/0.5; reports identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("metric oracle equivalence", oracle_equivalence),
        ("hand-computed anchors", hand_anchors),
        ("metric invariants", metric_invariants),
        ("generation determinism", gen_determinism),
        ("ground-truth fidelity", ground_truth_fidelity),
        ("default campaign shapes", campaign_shapes),
        ("decode checks", decode_checks),
        ("probe checks", probe_checks),
        ("end-to-end mock run", end_to_end_mock),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
