// Single-neuron traces, one row per tick. Most cases use dyadic values,
// where the rows were checked in exact rational arithmetic. The rest (decay
// 0.8 and the threshold floor) list the double-precision result of the same
// sequence of operations.

/// (tau_th, weights onto the neuron, presynaptic spikes per tick)
pub type Adapt = (f64, &'static [f64], &'static [&'static [bool]]);

pub struct HandCase {
    pub name: &'static str,
    /// (tau_syn, tau_mem, theta)
    pub lif: (f64, f64, f64),
    pub feeds: &'static [f64],
    pub adapt: Option<Adapt>,
    /// (i, v, s, a) after each tick
    pub expect: &'static [(f64, f64, bool, f64)],
}

pub const CASES: &[HandCase] = &[
    HandCase {
        name: "first_spike_then_soft_reset",
        lif: (0.5, 0.8, 1.0),
        feeds: &[1.0, 0.0],
        adapt: None,
        expect: &[
            (1.0, 1.0, true, 0.0),
            (0.5, 0.30000000000000004, false, 0.0),
        ],
    },
    HandCase {
        name: "quiescent",
        lif: (0.5, 0.5, 1.0),
        feeds: &[0.0, 0.0, 0.0, 0.0],
        adapt: None,
        expect: &[
            (0.0, 0.0, false, 0.0),
            (0.0, 0.0, false, 0.0),
            (0.0, 0.0, false, 0.0),
            (0.0, 0.0, false, 0.0),
        ],
    },
    HandCase {
        name: "sub_threshold_accumulation",
        lif: (0.5, 0.5, 2.0),
        feeds: &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
        adapt: None,
        expect: &[
            (0.5, 0.5, false, 0.0),
            (0.75, 1.0, false, 0.0),
            (0.875, 1.375, false, 0.0),
            (0.9375, 1.625, false, 0.0),
            (0.96875, 1.78125, false, 0.0),
            (0.984375, 1.875, false, 0.0),
        ],
    },
    HandCase {
        name: "equality_fires",
        lif: (0.0, 0.0, 1.0),
        feeds: &[1.0, 0.5, 1.0],
        adapt: None,
        expect: &[
            (1.0, 1.0, true, 0.0),
            (0.5, -0.5, false, 0.0),
            (1.0, 1.0, true, 0.0),
        ],
    },
    HandCase {
        name: "tau_syn_zero_tau_mem_one",
        lif: (0.0, 1.0, 1.0),
        feeds: &[0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25],
        adapt: None,
        expect: &[
            (0.25, 0.25, false, 0.0),
            (0.25, 0.5, false, 0.0),
            (0.25, 0.75, false, 0.0),
            (0.25, 1.0, true, 0.0),
            (0.25, 0.25, false, 0.0),
            (0.25, 0.5, false, 0.0),
            (0.25, 0.75, false, 0.0),
            (0.25, 1.0, true, 0.0),
            (0.25, 0.25, false, 0.0),
        ],
    },
    HandCase {
        name: "tau_syn_one_accumulates",
        lif: (1.0, 0.0, 1.5),
        feeds: &[0.5, 0.5, 0.0, 0.0, -0.5, 0.0],
        adapt: None,
        expect: &[
            (0.5, 0.5, false, 0.0),
            (1.0, 1.0, false, 0.0),
            (1.0, 1.0, false, 0.0),
            (1.0, 1.0, false, 0.0),
            (0.5, 0.5, false, 0.0),
            (0.5, 0.5, false, 0.0),
        ],
    },
    HandCase {
        name: "both_taus_one",
        lif: (1.0, 1.0, 4.0),
        feeds: &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0],
        adapt: None,
        expect: &[
            (0.5, 0.5, false, 0.0),
            (0.5, 1.0, false, 0.0),
            (0.5, 1.5, false, 0.0),
            (0.5, 2.0, false, 0.0),
            (0.5, 2.5, false, 0.0),
            (0.5, 3.0, false, 0.0),
            (-0.5, 2.5, false, 0.0),
            (-0.5, 2.0, false, 0.0),
        ],
    },
    HandCase {
        name: "both_taus_zero",
        lif: (0.0, 0.0, 0.5),
        feeds: &[0.75, 0.25, 0.5, 2.0, 0.0],
        adapt: None,
        expect: &[
            (0.75, 0.75, true, 0.0),
            (0.25, -0.25, false, 0.0),
            (0.5, 0.5, true, 0.0),
            (2.0, 1.5, true, 0.0),
            (0.0, -0.5, false, 0.0),
        ],
    },
    HandCase {
        name: "repeated_soft_reset",
        lif: (0.0, 0.5, 1.0),
        feeds: &[1.5, 1.5, 1.5, 1.5, 1.5, 1.5],
        adapt: None,
        expect: &[
            (1.5, 1.5, true, 0.0),
            (1.5, 1.25, true, 0.0),
            (1.5, 1.125, true, 0.0),
            (1.5, 1.0625, true, 0.0),
            (1.5, 1.03125, true, 0.0),
            (1.5, 1.015625, true, 0.0),
        ],
    },
    HandCase {
        name: "negative_feed_never_fires",
        lif: (0.75, 0.75, 0.5),
        feeds: &[-1.0, -0.5, -2.0, -0.25, 0.0],
        adapt: None,
        expect: &[
            (-1.0, -1.0, false, 0.0),
            (-1.25, -2.0, false, 0.0),
            (-2.9375, -4.4375, false, 0.0),
            (-2.453125, -5.78125, false, 0.0),
            (-1.83984375, -6.17578125, false, 0.0),
        ],
    },
    HandCase {
        name: "reset_can_drive_negative",
        lif: (0.0, 0.5, 1.0),
        feeds: &[3.0, 0.0, 0.0, 0.0],
        adapt: None,
        expect: &[
            (3.0, 3.0, true, 0.0),
            (0.0, 0.5, false, 0.0),
            (0.0, 0.25, false, 0.0),
            (0.0, 0.125, false, 0.0),
        ],
    },
    HandCase {
        name: "zero_threshold_uses_floor",
        lif: (0.0, 0.5, 0.0),
        feeds: &[0.5, 0.0, 0.0, 0.0],
        adapt: None,
        expect: &[
            (0.5, 0.5, true, 0.0),
            (0.0, 0.24, true, 0.0),
            (0.0, 0.11, true, 0.0),
            (0.0, 0.045, true, 0.0),
        ],
    },
    HandCase {
        name: "burst_then_leak",
        lif: (0.25, 0.75, 1.0),
        feeds: &[2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        adapt: None,
        expect: &[
            (2.0, 2.0, true, 0.0),
            (2.5, 3.0, true, 0.0),
            (0.625, 1.875, true, 0.0),
            (0.15625, 0.5625, false, 0.0),
            (0.0390625, 0.4609375, false, 0.0),
            (0.009765625, 0.35546875, false, 0.0),
            (0.00244140625, 0.26904296875, false, 0.0),
        ],
    },
    HandCase {
        name: "iwta_decay_no_input",
        lif: (0.0, 0.5, 1.0),
        feeds: &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        adapt: Some((
            0.5,
            &[0.5],
            &[&[true], &[false], &[false], &[false], &[false], &[false]],
        )),
        expect: &[
            (0.0, 0.0, false, 0.5),
            (0.0, 0.0, false, 0.25),
            (0.0, 0.0, false, 0.125),
            (0.0, 0.0, false, 0.0625),
            (0.0, 0.0, false, 0.03125),
            (0.0, 0.0, false, 0.015625),
        ],
    },
    HandCase {
        name: "iwta_raises_threshold",
        lif: (0.0, 0.0, 1.0),
        feeds: &[1.0, 1.0, 1.0, 1.0],
        adapt: Some((0.5, &[0.5], &[&[false], &[true], &[true], &[false]])),
        expect: &[
            (1.0, 1.0, true, 0.0),
            (1.0, 0.0, false, 0.5),
            (1.0, 1.0, false, 0.75),
            (1.0, 1.0, false, 0.375),
        ],
    },
    HandCase {
        name: "iwta_lowers_threshold",
        lif: (0.0, 0.5, 1.0),
        feeds: &[0.5, 0.5, 0.0, 0.0, 0.0],
        adapt: Some((
            0.75,
            &[-0.5],
            &[&[true], &[true], &[false], &[false], &[false]],
        )),
        expect: &[
            (0.5, 0.5, true, -0.5),
            (0.5, 0.25, true, -0.875),
            (0.0, 0.0, false, -0.65625),
            (0.0, 0.0, false, -0.4921875),
            (0.0, 0.0, false, -0.369140625),
        ],
    },
    HandCase {
        name: "iwta_floor_reached",
        lif: (0.0, 0.0, 0.25),
        feeds: &[0.0, 0.5, 0.0],
        adapt: Some((0.5, &[-1.0], &[&[true], &[false], &[false]])),
        expect: &[
            (0.0, 0.0, false, -1.0),
            (0.5, 0.5, true, -0.5),
            (0.0, -0.01, false, -0.25),
        ],
    },
    HandCase {
        name: "iwta_two_presynaptic",
        lif: (0.0, 0.5, 1.0),
        feeds: &[0.75, 0.75, 0.75, 0.75, 0.75],
        adapt: Some((
            0.5,
            &[0.25, -0.25],
            &[
                &[true, false],
                &[true, true],
                &[false, true],
                &[false, false],
                &[true, false],
            ],
        )),
        expect: &[
            (0.75, 0.75, false, 0.25),
            (0.75, 1.125, true, 0.125),
            (0.75, 0.1875, false, -0.1875),
            (0.75, 0.84375, false, -0.09375),
            (0.75, 1.171875, false, 0.203125),
        ],
    },
    HandCase {
        name: "iwta_reset_uses_previous_threshold",
        lif: (0.0, 1.0, 1.0),
        feeds: &[2.0, 0.0, 0.0],
        adapt: Some((0.0, &[1.0], &[&[false], &[true], &[false]])),
        expect: &[
            (2.0, 2.0, true, 0.0),
            (0.0, 1.0, false, 1.0),
            (0.0, 1.0, true, 0.0),
        ],
    },
    HandCase {
        name: "iwta_tau_th_one_holds",
        lif: (0.0, 0.5, 2.0),
        feeds: &[1.0, 1.0, 1.0, 1.0, 1.0],
        adapt: Some((
            1.0,
            &[0.5],
            &[&[true], &[false], &[false], &[false], &[false]],
        )),
        expect: &[
            (1.0, 1.0, false, 0.5),
            (1.0, 1.5, false, 0.5),
            (1.0, 1.75, false, 0.5),
            (1.0, 1.875, false, 0.5),
            (1.0, 1.9375, false, 0.5),
        ],
    },
];
