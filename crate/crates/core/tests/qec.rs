use ionqv_core::qec::{
    build_repcode_circuit, exhaustive_logical_error, matched_distances, sample_logical_error, ChannelModel, DecoderKind,
    DepolarizingReading,
};

#[test]
fn estimate_does_not_depend_on_thread_count() {
    let c = build_repcode_circuit(3, 1, 3).unwrap();
    let m = ChannelModel::from_p(0.05).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_logical_error(&c, &m, DecoderKind::SpaceTime, 20_000, 5).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.failures, b.failures);
    assert!(a.ci_low <= a.p_l && a.p_l <= a.ci_high);
}

#[test]
fn sampling_matches_exhaustive_enumeration() {
    let c = build_repcode_circuit(3, 1, 1).unwrap();
    let m = ChannelModel::from_p(0.3).unwrap();
    let exact = exhaustive_logical_error(&c, &m, DecoderKind::SpaceTime).unwrap();
    let est = sample_logical_error(&c, &m, DecoderKind::SpaceTime, 200_000, 8).unwrap();
    assert!(est.ci_low <= exact && exact <= est.ci_high, "{exact} outside [{}, {}]", est.ci_low, est.ci_high);
}

#[test]
fn space_time_decoder_beats_per_round_matching() {
    let (d1, _) = matched_distances(5).unwrap();
    let c = build_repcode_circuit(d1, 1, d1).unwrap();
    let m = ChannelModel::from_p(0.03).unwrap();
    let st = sample_logical_error(&c, &m, DecoderKind::SpaceTime, 50_000, 2).unwrap();
    let pr = sample_logical_error(&c, &m, DecoderKind::PerRound, 50_000, 2).unwrap();
    assert!(st.p_l < pr.p_l, "{} vs {}", st.p_l, pr.p_l);
}

#[test]
fn identity_reading_lowers_the_error() {
    let c = build_repcode_circuit(3, 1, 1).unwrap();
    let non = ChannelModel::from_p(0.2).unwrap();
    let inc = ChannelModel { reading: DepolarizingReading::IncludeIdentity, ..non };
    let a = exhaustive_logical_error(&c, &non, DecoderKind::SpaceTime).unwrap();
    let b = exhaustive_logical_error(&c, &inc, DecoderKind::SpaceTime).unwrap();
    assert!(b < a, "{b} vs {a}");
}

#[test]
fn invalid_inputs() {
    assert!(ChannelModel::from_p(2.0).is_err());
    assert!(matched_distances(2).is_err());
    assert!(build_repcode_circuit(4, 1, 1).is_err());
    let c = build_repcode_circuit(3, 1, 1).unwrap();
    assert!(sample_logical_error(&c, &ChannelModel::from_p(0.01).unwrap(), DecoderKind::SpaceTime, 0, 1).is_err());
}
