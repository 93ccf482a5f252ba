use chrono::{Duration, NaiveDate, TimeZone, Utc};
use proptest::prelude::*;
use signallab::classify::labels::{Sentiment, TweetType, UserType};
use signallab::classify::{
    agreement_accuracy, classified_weekly_counts, consensus_label, train_tree, DecisionTree, Dimension, RevisedTriple,
    TreeParams, TripleFilter, TweetFeatures,
};
use signallab::events::{detect_peak_weeks, event_study, peak_count, Event, EventStudyConfig};
use signallab::ingest::{aggregate_weekly, align, filter_country, normalize_series, CountrySpec, TweetRecord};
use signallab::tsa::granger::granger_test;
use signallab::tsa::{adf_test, lagged_correlation, ols_fit, pearson, DesignMatrix};
use signallab::{Series, WeekRange};

fn monday() -> NaiveDate {
    NaiveDate::from_ymd_opt(2012, 1, 2).unwrap()
}

fn series(values: &[f64]) -> Series {
    Series::from_values(monday(), values, "s").unwrap()
}

fn tweet(i: usize, minutes: i64, lang: &str, tz: &str) -> TweetRecord {
    TweetRecord {
        id: i.to_string(),
        text: String::new(),
        created_at: Utc.with_ymd_and_hms(2012, 1, 2, 0, 0, 0).unwrap() + Duration::minutes(minutes),
        user_name: "u".into(),
        user_screen_name: "u".into(),
        followers: 1,
        friends: 0,
        statuses_count: 0,
        retweet_count: 0,
        is_retweet: false,
        user_timezone: tz.into(),
        language: lang.into(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn values(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, n)
}

fn any_triple() -> impl Strategy<Value = RevisedTriple> {
    (0..4usize, 0..2usize, 0..2usize).prop_map(|(t, u, s)| {
        RevisedTriple::new(
            [TweetType::JobAdvert, TweetType::ProductAdvert, TweetType::Personal, TweetType::Other][t],
            [UserType::Person, UserType::Organization][u],
            [Sentiment::Positive, Sentiment::NotPositive][s],
        )
    })
}

const MINUTES_PER_WEEK: i64 = 7 * 24 * 60;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weekly_aggregation_is_additive(
        stamps in prop::collection::vec(-MINUTES_PER_WEEK..12 * MINUTES_PER_WEEK, 0..200),
        split in prop::collection::vec(any::<bool>(), 200),
    ) {
        let range = WeekRange::new(monday(), 10).unwrap();
        let ts: Vec<_> = stamps.iter().map(|&m| tweet(0, m, "nl", "Amsterdam").created_at).collect();
        let (a, b): (Vec<_>, Vec<_>) = ts.iter().zip(&split).partition(|(_, s)| **s);
        let a: Vec<_> = a.into_iter().map(|(t, _)| *t).collect();
        let b: Vec<_> = b.into_iter().map(|(t, _)| *t).collect();
        let (whole, dw) = aggregate_weekly::<f64>(&ts, &range, "w");
        let (pa, da) = aggregate_weekly::<f64>(&a, &range, "a");
        let (pb, db) = aggregate_weekly::<f64>(&b, &range, "b");
        for i in 0..10 {
            prop_assert_eq!(whole.get(i).unwrap(), pa.get(i).unwrap() + pb.get(i).unwrap());
        }
        prop_assert_eq!(dw.in_range + dw.out_of_range, ts.len());
        prop_assert_eq!(dw.in_range, da.in_range + db.in_range);
    }

    #[test]
    fn country_filter_is_idempotent(flags in prop::collection::vec((0..3usize, 0..3usize), 0..60)) {
        let langs = ["nl", "NL", "es"];
        let tzs = ["Amsterdam", "amsterdam", "Madrid"];
        let tweets: Vec<_> = flags.iter().enumerate().map(|(i, &(l, t))| tweet(i, 0, langs[l], tzs[t])).collect();
        let spec = CountrySpec::preset("nl").unwrap();
        let once = filter_country(&tweets, &spec);
        prop_assert_eq!(filter_country(&once, &spec), once.clone());
        prop_assert!(once.iter().all(|t| spec.matches(t)));
    }

    #[test]
    fn normalization_keeps_ratios_and_argmax(raw in prop::collection::vec(prop::option::weighted(0.9, 0.0..500.0f64), 1..40)) {
        prop_assume!(raw.iter().flatten().any(|v| *v > 0.0));
        let s = Series::new(monday(), raw.clone(), "s").unwrap();
        let n = normalize_series(&s).unwrap();
        let argmax = |v: &[Option<f64>]| v.iter().enumerate().filter_map(|(i, x)| x.map(|x| (i, x)))
            .fold(None, |best: Option<(usize, f64)>, (i, x)| match best { Some((_, b)) if b >= x => best, _ => Some((i, x)) })
            .map(|(i, _)| i);
        prop_assert_eq!(argmax(&raw), argmax(&n.values));
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if let (Some(ri), Some(rj), Some(ni), Some(nj)) = (raw[i], raw[j], n.get(i), n.get(j)) {
                    if rj != 0.0 {
                        prop_assert!(close(ni / nj, ri / rj, 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn align_is_commutative_and_idempotent(
        off_a in 0i64..10, len_a in 1usize..20, off_b in 0i64..10, len_b in 1usize..20,
    ) {
        let a = Series::from_values(monday() + Duration::weeks(off_a), &vec![1.0; len_a], "a").unwrap();
        let b = Series::from_values(monday() + Duration::weeks(off_b), &vec![2.0; len_b], "b").unwrap();
        match (align(&a, &b), align(&b, &a)) {
            (Ok((a1, b1)), Ok((b2, a2))) => {
                prop_assert_eq!(&a1, &a2);
                prop_assert_eq!(&b1, &b2);
                let (a3, b3) = align(&a1, &b1).unwrap();
                prop_assert_eq!(a3, a1);
                prop_assert_eq!(b3, b1);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "align succeeded in one order only"),
        }
    }

    #[test]
    fn agreement_is_hits_over_ratings(groups in prop::collection::vec(prop::collection::vec(0..3u8, 3), 1..50)) {
        let r = agreement_accuracy(&groups).unwrap();
        prop_assert_eq!(r.n_ratings, 3 * groups.len());
        prop_assert_eq!(r.overall_accuracy, r.hits as f64 / r.n_ratings as f64);
        for (class, c) in &r.per_class {
            let consensus = groups.iter()
                .filter(|g| consensus_label(g).unwrap().is_some_and(|k| k.to_string() == *class))
                .count();
            prop_assert!(consensus <= c.ratings);
        }
    }

    #[test]
    fn weekly_counts_partition(tweets in prop::collection::vec((0..6 * MINUTES_PER_WEEK, any_triple()), 0..80)) {
        let range = WeekRange::new(monday(), 6).unwrap();
        let rows: Vec<_> = tweets.iter().enumerate().map(|(i, &(m, t))| (tweet(i, m, "nl", "Amsterdam"), t)).collect();
        let total: Series = classified_weekly_counts(&rows, &TripleFilter::ALL, &range);
        let parts: Vec<Series> = [UserType::Person, UserType::Organization]
            .iter()
            .flat_map(|&u| [Sentiment::Positive, Sentiment::NotPositive].map(|s| TripleFilter::new(Some(u), None, Some(s))))
            .map(|f| classified_weekly_counts(&rows, &f, &range))
            .collect();
        for w in 0..6 {
            prop_assert_eq!(total.get(w).unwrap(), parts.iter().map(|p| p.get(w).unwrap()).sum::<f64>());
        }
    }

    #[test]
    fn pearson_affine_invariance(
        x in values(5..30), noise in values(30..31),
        a in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], b in -50.0..50.0f64,
        c in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], d in -50.0..50.0f64,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, e)| 0.5 * v + e).collect();
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let cy: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let r2 = pearson(&ax, &cy).unwrap();
        prop_assert!(close(r2, (a * c).signum() * r, 1e-9), "{r2} vs {r}");
    }

    #[test]
    fn lag_symmetry(x in values(12..30), shift in 0usize..3, max_lag in 0i32..4) {
        let y: Vec<f64> = (0..x.len()).map(|i| x[(i + shift) % x.len()] * 0.7 + (i as f64).sin()).collect();
        let fwd = lagged_correlation(&series(&x), &series(&y), max_lag).unwrap();
        let back = lagged_correlation(&series(&y), &series(&x), max_lag).unwrap();
        for l in -max_lag..=max_lag {
            prop_assert_eq!(&fwd[&l], &back[&-l]);
        }
    }

    #[test]
    fn ols_residuals_orthogonal(cols in prop::collection::vec(values(25..26), 1..4), y in values(25..26)) {
        let x = DesignMatrix::with_intercept(&cols).unwrap();
        let Ok(fit) = ols_fit(&y, &x) else { return Ok(()) };
        for c in 0..x.cols() {
            let col = x.column(c);
            let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            let scale = col.iter().map(|v| v * v).sum::<f64>().sqrt() * fit.rss.sqrt();
            prop_assert!(dot.abs() <= 1e-9 * scale.max(1.0), "column {c}: {dot}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn granger_nested_and_affine_invariant(
        x in values(40..41), e in values(40..41), k in 1usize..4,
        a in 0.1..10.0f64, b in -100.0..100.0f64, c in 0.1..10.0f64, d in -100.0..100.0f64,
    ) {
        let y: Vec<f64> = (0..40).map(|t| if t >= 1 { 0.3 * x[t - 1] } else { 0.0 } + e[t]).collect();
        let r = granger_test(&series(&x), &series(&y), k).unwrap();
        prop_assert!(r.rss_unrestricted <= r.rss_restricted * (1.0 + 1e-12));
        prop_assert!(r.f_stat >= 0.0);
        let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let ys: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let r2 = granger_test(&series(&xs), &series(&ys), k).unwrap();
        prop_assert!(close(r2.f_stat, r.f_stat, 1e-7), "{} vs {}", r2.f_stat, r.f_stat);
    }

    #[test]
    fn adf_shift_invariant(e in values(40..41), shift in -1000.0..1000.0f64, p in 0usize..3) {
        let walk: Vec<f64> = e.iter().scan(0.0, |acc, v| { *acc = 0.5 * *acc + v; Some(*acc) }).collect();
        let Ok(a) = adf_test(&series(&walk), p) else { return Ok(()) };
        let shifted: Vec<f64> = walk.iter().map(|v| v + shift).collect();
        let b = adf_test(&series(&shifted), p).unwrap();
        prop_assert!(close(a.statistic, b.statistic, 1e-8), "{} vs {}", a.statistic, b.statistic);
    }

    #[test]
    fn peaks_are_top_k(vals in prop::collection::vec(0u32..50, 10..60), q in 0.5..0.99f64) {
        let v: Vec<f64> = vals.iter().map(|&x| f64::from(x)).collect();
        prop_assume!(v.iter().any(|x| *x != v[0]));
        let events = detect_peak_weeks(&series(&v), q, false).unwrap();
        prop_assert_eq!(events.len(), peak_count(v.len(), q));
        let chosen: Vec<usize> = events.iter().map(|e| e.week).collect();
        let lowest_chosen = events.iter().map(|e| e.tweet_value).fold(f64::INFINITY, f64::min);
        for (i, x) in v.iter().enumerate() {
            if !chosen.contains(&i) {
                prop_assert!(*x <= lowest_chosen);
            }
        }
        let merged = detect_peak_weeks(&series(&v), q, true).unwrap();
        prop_assert_eq!(merged.iter().map(|e| e.run_length).sum::<usize>(), events.len());
    }

    #[test]
    fn event_study_scale_and_shift(
        sales in prop::collection::vec(1.0..2.0f64, 60), weeks in prop::collection::btree_set(0usize..60, 2..8),
        c in 0.01..100.0f64, shift in -1000.0..1000.0f64,
    ) {
        let events: Vec<Event<f64>> = weeks.iter()
            .map(|&w| Event { week: w, tweet_value: 1.0, run_length: 1, usable: true, exclusion_reason: None })
            .collect();
        let cfg = EventStudyConfig { event_window: 2, estimation_window: 4, ..Default::default() };
        let Ok(base) = event_study(&series(&sales), &events, &cfg) else { return Ok(()) };
        prop_assert_eq!(base.n_usable + base.n_excluded, events.len());
        let scaled: Vec<f64> = sales.iter().map(|v| v * c).collect();
        let s = event_study(&series(&scaled), &events, &cfg).unwrap();
        prop_assert!(close(s.t_statistic, base.t_statistic, 1e-9));
        prop_assert!(close(s.p_value, base.p_value, 1e-9));
        for (o, b) in s.outcomes.iter().zip(&base.outcomes) {
            prop_assert!(close(o.car, c * b.car, 1e-9));
        }
        let moved: Vec<f64> = sales.iter().map(|v| v + shift).collect();
        let m = event_study(&series(&moved), &events, &cfg).unwrap();
        for (o, b) in m.outcomes.iter().zip(&base.outcomes) {
            for (x, y) in o.abnormal.iter().zip(&b.abnormal) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + shift.abs()));
            }
        }
    }
}

fn features(v: [u64; 3]) -> TweetFeatures {
    TweetFeatures { followers: v[0], friends: v[1], statuses_count: v[2], ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tree_is_deterministic(rows in prop::collection::vec(([0u64..1000, 0..1000, 0..1000], 0..3usize), 20..80), seed in any::<u64>()) {
        let ex: Vec<_> = rows.iter().map(|(v, c)| (features(*v), ["a", "b", "c"][*c].to_string())).collect();
        let params = TreeParams { split_seed: seed, ..Default::default() };
        let (t1, r1) = train_tree(&ex, Dimension::UserType, &params).unwrap();
        let (t2, r2) = train_tree(&ex, Dimension::UserType, &params).unwrap();
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn fully_grown_tree_fits_separable_data(rows in prop::collection::btree_map([0u64..500, 0..500, 0..500], 0..3usize, 2..60)) {
        let ex: Vec<_> = rows.iter().map(|(v, c)| (features(*v), ["a", "b", "c"][*c].to_string())).collect();
        let tree = DecisionTree::fit(&ex, Dimension::TweetType, 64, 1).unwrap();
        for (f, label) in &ex {
            prop_assert_eq!(&tree.predict(f).0, label);
        }
    }

    #[test]
    fn monotone_feature_transform(rows in prop::collection::vec(([1u64..300, 0..300, 0..300], 0..2usize), 10..60)) {
        let ex: Vec<_> = rows.iter().map(|(v, c)| (features(*v), ["a", "b"][*c].to_string())).collect();
        // strictly increasing map applied to followers
        let warp = |f: &TweetFeatures| TweetFeatures { followers: f.followers * f.followers + 7, ..*f };
        let warped: Vec<_> = ex.iter().map(|(f, c)| (warp(f), c.clone())).collect();
        let t1 = DecisionTree::fit(&ex, Dimension::Sentiment, 6, 2).unwrap();
        let t2 = DecisionTree::fit(&warped, Dimension::Sentiment, 6, 2).unwrap();
        for ((f, _), (g, _)) in ex.iter().zip(&warped) {
            prop_assert_eq!(t1.predict(f), t2.predict(g));
        }
        prop_assert_eq!(t1.depth(), t2.depth());
        prop_assert_eq!(t1.n_leaves(), t2.n_leaves());
    }
}
