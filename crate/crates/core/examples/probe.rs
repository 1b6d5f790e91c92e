use causeshift::density::{convolve, GridDensity};

fn two_spike(a: f64, b: f64, wa: f64, step: f64, lo: f64, hi: f64) -> GridDensity {
    let n = ((hi - lo) / step).round() as usize + 1;
    let mut v = vec![0.0; n];
    let ia = ((a - lo) / step).round() as usize;
    let ib = ((b - lo) / step).round() as usize;
    v[ia] = wa / step;
    v[ib] = (1.0 - wa) / step;
    GridDensity::new(lo, step, v).unwrap()
}

fn deep_gaussian(sigma: f64, step: f64) -> GridDensity {
    let half = ((8.0 * sigma) / step).ceil() as usize;
    GridDensity::gaussian(0.0, sigma, -(half as f64) * step, step, 2 * half + 1).unwrap()
}

fn main() {
    let step = 8.0 / 1023.0;
    let spikes = two_spike(-1.0, 1.0, 0.5, step, -3.0, 3.0);
    let g = deep_gaussian(0.3, step);
    let d = convolve(&spikes, &g).unwrap();
    println!("spikes+gauss(0.3) deep, len {}", d.len());
    for s in [0.0, 0.05, 0.15, 0.25, 0.27, 0.28, 0.29, 0.295, 0.3, 0.305, 0.31, 0.35] {
        let neg = causeshift::spectral::debug_neg_mass(&d, s);
        println!("  sigma {s:.3} -> neg mass {neg:.3e}");
    }
    for tol in [1e-3, 1e-2, 0.05] {
        let (sg, _) = causeshift::spectral::gaussian_max_width_deconv(&d, tol).unwrap();
        println!("  search with tol {tol:.0e}: sigma {sg:.4}");
    }

    let step2 = 8.0 / 511.0;
    let gd = GridDensity::gaussian(0.0, 0.5, -4.0, step2, 512).unwrap();
    println!("pure gaussian(0.5), len {}", gd.len());
    for s in [0.0, 0.3, 0.4, 0.44, 0.46, 0.48, 0.484, 0.49, 0.5, 0.51] {
        let neg = causeshift::spectral::debug_neg_mass(&gd, s);
        println!("  sigma {s:.3} -> neg mass {neg:.3e}");
    }
    for tol in [1e-3, 1e-2, 0.05] {
        let (sg, rem) = causeshift::spectral::gaussian_max_width_deconv(&gd, tol).unwrap();
        let conc = rem.mass_within(rem.mode(), 3.0 * step2);
        println!("  search with tol {tol:.0e}: sigma {sg:.4}, spike mass {conc:.4}");
    }

    // Forward-constructed sigma recovery across the acceptance range.
    for sigma in [0.1, 0.2, 0.3, 0.5] {
        let g = deep_gaussian(sigma, step);
        let d = convolve(&spikes, &g).unwrap();
        for tol in [1e-3, 1e-2] {
            let (sg, rem) = causeshift::spectral::gaussian_max_width_deconv(&d, tol).unwrap();
            let l1 = rem.l1_distance(&spikes);
            println!("recover sigma {sigma}: tol {tol:.0e} -> {sg:.4} (l1 to spikes {l1:.4})");
        }
    }

    // Pure gaussian on a coarse grid: sigma >= 0.5 - step target.
    for n in [129usize, 161, 257] {
        let step3 = 8.0 / (n - 1) as f64;
        let gd = GridDensity::gaussian(0.0, 0.5, -4.0, step3, n).unwrap();
        for tol in [1e-2, 0.05] {
            let (sg, rem) = causeshift::spectral::gaussian_max_width_deconv(&gd, tol).unwrap();
            println!(
                "coarse n {n} (step {step3:.4}): tol {tol:.0e} -> sigma {sg:.4} (need {:.4}), rem sd {:.4}",
                0.5 - step3,
                rem.std_dev()
            );
        }
    }

    // Conditional ANM per-domain p-values across seeds.
    use causeshift::anm::AnmConfig;
    use causeshift::conditional::fit_shared_anm;
    use causeshift::seeding::rng_for;
    use causeshift::Dataset;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};
    for seed in [32u64, 33, 40, 41, 42] {
        let mut rng = rng_for(seed, 0);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let xs_a: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..0.4)).collect();
        let ys_a: Vec<f64> = xs_a
            .iter()
            .map(|x| x.powi(3) + noise.sample(&mut rng))
            .collect();
        let xs_b: Vec<f64> = (0..500).map(|_| rng.gen_range(-0.4..1.0)).collect();
        let ys_b: Vec<f64> = xs_b
            .iter()
            .map(|x| {
                let u: f64 = rng.gen::<f64>() - 0.5;
                x.powi(3) - 0.3 * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        let shared = fit_shared_anm(
            &[
                Dataset::new(xs_a, ys_a).unwrap(),
                Dataset::new(xs_b, ys_b).unwrap(),
            ],
            &AnmConfig::default(),
        )
        .unwrap();
        println!(
            "seed {seed}: p_a {:.4}, p_b {:.4}",
            shared.per_dataset[0].independence_pvalue, shared.per_dataset[1].independence_pvalue
        );
    }
}
