//! Reference values as `(ε, level, K or ‖E‖, iterations, K_1)`.

pub type GoldenRow = (f64, usize, f64, Option<usize>, Option<f64>);

pub const ZZ: &[GoldenRow] = &[
    (1e-5, 0, 1.73, Some(14), None),
    (1e-3, 0, 1.73, Some(12), None),
    (1e-1, 0, 1.73, None, None),
    (1.0, 0, 1.73, Some(9), None),
    (1e1, 0, 1.72, Some(10), None),
    (1e3, 0, 1.73, Some(12), None),
    (1e5, 0, 1.73, Some(13), None),
    (1e-5, 1, 1.72, Some(15), None),
    (1e-3, 1, 1.72, Some(13), None),
    (1e-1, 1, 1.72, None, None),
    (1.0, 1, 1.72, Some(10), None),
    (1e1, 1, 1.72, Some(10), None),
    (1e3, 1, 1.72, Some(12), None),
    (1e5, 1, 1.72, Some(14), None),
    (1e-5, 2, 1.72, Some(15), None),
    (1e-3, 2, 1.72, Some(13), None),
    (1e-1, 2, 1.72, None, None),
    (1.0, 2, 1.71, Some(10), None),
    (1e1, 2, 1.7, Some(10), None),
    (1e3, 2, 1.71, Some(12), None),
    (1e5, 2, 1.72, Some(15), None),
    (1e-5, 3, 1.72, Some(15), None),
    (1e-3, 3, 1.72, Some(12), None),
    (1e-1, 3, 1.71, None, None),
    (1.0, 3, 1.71, Some(10), None),
    (1e1, 3, 1.69, Some(10), None),
    (1e3, 3, 1.69, Some(12), None),
    (1e5, 3, 1.69, Some(16), None),
];

pub const TWO_LEVEL_1: &[GoldenRow] = &[
    (1e-5, 0, 30000.0, Some(12), Some(4.52)),
    (1e-5, 1, 33100.0, Some(19), Some(3.37)),
    (1e-5, 2, 27700.0, Some(22), Some(2.95)),
    (1e-5, 3, 23700.0, Some(21), Some(2.78)),
    (1e-5, 4, 20800.0, Some(21), Some(2.71)),
    (1e-3, 0, 301.0, Some(11), Some(4.48)),
    (1e-3, 1, 333.0, Some(15), Some(3.36)),
    (1e-3, 2, 280.0, Some(18), Some(2.95)),
    (1e-3, 3, 240.0, Some(18), Some(2.77)),
    (1e-3, 4, 211.0, Some(18), Some(2.71)),
    (1e-1, 0, 4.42, Some(10), Some(2.97)),
    (1e-1, 1, 5.22, Some(13), Some(2.89)),
    (1e-1, 2, 4.91, Some(14), Some(2.69)),
    (1e-1, 3, 4.7, Some(14), Some(2.6)),
    (1e-1, 4, 4.59, Some(14), Some(2.57)),
    (1.0, 0, 2.16, Some(8), Some(2.06)),
    (1.0, 1, 2.25, Some(11), Some(2.16)),
    (1.0, 2, 2.29, Some(12), Some(2.21)),
    (1.0, 3, 2.3, Some(12), Some(2.19)),
    (1.0, 4, 2.33, Some(12), Some(2.18)),
    (1e1, 0, 2.33, Some(9), Some(2.3)),
    (1e1, 1, 3.16, Some(12), Some(2.63)),
    (1e1, 2, 3.58, Some(13), Some(2.66)),
    (1e1, 3, 3.8, Some(14), Some(2.62)),
    (1e1, 4, 3.95, Some(14), Some(2.61)),
    (1e3, 0, 2.54, Some(9), Some(2.4)),
    (1e3, 1, 4.12, Some(13), Some(2.82)),
    (1e3, 2, 5.37, Some(14), Some(2.85)),
    (1e3, 3, 6.56, Some(15), Some(2.8)),
    (1e3, 4, 7.79, Some(16), Some(2.78)),
    (1e5, 0, 2.55, Some(9), Some(2.4)),
    (1e5, 1, 4.13, Some(13), Some(2.83)),
    (1e5, 2, 5.41, Some(15), Some(2.85)),
    (1e5, 3, 6.62, Some(16), Some(2.8)),
    (1e5, 4, 7.89, Some(17), Some(2.78)),
];

pub const TWO_LEVEL_2: &[GoldenRow] = &[
    (1e-5, 1, 49200.0, Some(18), Some(4.27)),
    (1e-5, 2, 42800.0, Some(24), Some(3.61)),
    (1e-5, 3, 36600.0, Some(26), Some(3.38)),
    (1e-5, 4, 32100.0, Some(27), Some(3.33)),
    (1e-3, 1, 494.0, Some(16), Some(4.26)),
    (1e-3, 2, 431.0, Some(21), Some(3.61)),
    (1e-3, 3, 370.0, Some(21), Some(3.38)),
    (1e-3, 4, 325.0, Some(21), Some(3.34)),
    (1e-1, 1, 7.14, Some(14), Some(3.46)),
    (1e-1, 2, 6.69, Some(16), Some(3.27)),
    (1e-1, 3, 6.35, Some(16), Some(3.2)),
    (1e-1, 4, 6.19, Some(16), Some(3.19)),
    (1.0, 1, 2.63, Some(11), Some(2.32)),
    (1.0, 2, 2.75, Some(13), Some(2.61)),
    (1.0, 3, 2.91, Some(14), Some(2.63)),
    (1.0, 4, 2.97, Some(14), Some(2.61)),
    (1e1, 1, 3.74, Some(13), Some(3.33)),
    (1e1, 2, 4.3, Some(15), Some(3.38)),
    (1e1, 3, 4.48, Some(16), Some(3.32)),
    (1e1, 4, 4.67, Some(16), Some(3.29)),
    (1e3, 1, 4.93, Some(14), Some(3.64)),
    (1e3, 2, 6.59, Some(16), Some(3.65)),
    (1e3, 3, 8.02, Some(18), Some(3.56)),
    (1e3, 4, 9.55, Some(18), Some(3.49)),
    (1e5, 1, 4.95, Some(14), Some(3.65)),
    (1e5, 2, 6.63, Some(16), Some(3.65)),
    (1e5, 3, 8.02, Some(18), Some(3.53)),
    (1e5, 4, 9.66, Some(19), Some(3.49)),
];

pub const TWO_LEVEL_4: &[GoldenRow] = &[
    (1e-5, 2, 78900.0, Some(31), Some(6.58)),
    (1e-5, 3, 72900.0, Some(34), Some(5.99)),
    (1e-5, 4, 64100.0, Some(35), Some(5.97)),
    (1e-3, 2, 793.0, Some(25), Some(6.57)),
    (1e-3, 3, 733.0, Some(28), Some(5.99)),
    (1e-3, 4, 646.0, Some(29), Some(5.97)),
    (1e-1, 2, 12.2, Some(20), Some(5.58)),
    (1e-1, 3, 11.6, Some(22), Some(5.69)),
    (1e-1, 4, 11.4, Some(22), Some(5.76)),
    (1.0, 2, 4.73, Some(17), Some(3.99)),
    (1.0, 3, 5.22, Some(19), Some(4.75)),
    (1.0, 4, 5.32, Some(19), Some(4.8)),
    (1e1, 2, 7.55, Some(19), Some(6.34)),
    (1e1, 3, 6.84, Some(21), Some(5.63)),
    (1e1, 4, 6.97, Some(22), Some(5.95)),
    (1e3, 2, 11.2, Some(20), Some(6.99)),
    (1e3, 3, 12.2, Some(23), Some(6.11)),
    (1e3, 4, 14.6, Some(25), Some(6.39)),
    (1e5, 2, 11.3, Some(20), Some(7.0)),
    (1e5, 3, 12.3, Some(23), Some(6.12)),
    (1e5, 4, 14.9, Some(26), Some(6.4)),
];

pub const BPX: &[GoldenRow] = &[
    (1e-5, 0, 30000.0, Some(12), Some(4.52)),
    (1e-5, 1, 50300.0, Some(27), Some(5.69)),
    (1e-5, 2, 67700.0, Some(33), Some(6.81)),
    (1e-5, 3, 86400.0, Some(37), Some(7.9)),
    (1e-5, 4, 106000.0, Some(42), Some(9.03)),
    (1e-3, 0, 301.0, Some(11), Some(4.49)),
    (1e-3, 1, 506.0, Some(22), Some(5.65)),
    (1e-3, 2, 680.0, Some(27), Some(6.78)),
    (1e-3, 3, 868.0, Some(31), Some(7.86)),
    (1e-3, 4, 1060.0, Some(35), Some(8.98)),
    (1e-1, 0, 4.42, Some(10), Some(2.97)),
    (1e-1, 1, 7.5, Some(16), Some(4.22)),
    (1e-1, 2, 9.92, Some(20), Some(5.28)),
    (1e-1, 3, 12.5, Some(24), Some(6.3)),
    (1e-1, 4, 15.1, Some(26), Some(7.41)),
    (1.0, 0, 2.16, Some(8), Some(2.07)),
    (1.0, 1, 3.32, Some(13), Some(3.17)),
    (1.0, 2, 4.45, Some(17), Some(4.25)),
    (1.0, 3, 5.61, Some(20), Some(5.23)),
    (1.0, 4, 6.67, Some(22), Some(6.24)),
    (1e1, 0, 2.33, Some(9), Some(2.3)),
    (1e1, 1, 4.58, Some(14), Some(3.84)),
    (1e1, 2, 6.69, Some(19), Some(5.06)),
    (1e1, 3, 8.75, Some(22), Some(6.19)),
    (1e1, 4, 11.0, Some(26), Some(7.31)),
    (1e3, 0, 2.54, Some(9), Some(2.4)),
    (1e3, 1, 5.92, Some(16), Some(4.11)),
    (1e3, 2, 10.1, Some(21), Some(5.42)),
    (1e3, 3, 15.6, Some(25), Some(6.62)),
    (1e3, 4, 23.0, Some(29), Some(7.81)),
    (1e5, 0, 2.55, Some(9), Some(2.4)),
    (1e5, 1, 5.94, Some(16), Some(4.11)),
    (1e5, 2, 10.2, Some(21), Some(5.43)),
    (1e5, 3, 15.7, Some(25), Some(6.62)),
    (1e5, 4, 23.3, Some(29), Some(7.81)),
];

pub const SIPG1: &[GoldenRow] = &[
    (1e-5, 0, 28500.0, Some(44), Some(6.27)),
    (1e-5, 1, 33700.0, Some(44), Some(6.33)),
    (1e-5, 2, 31000.0, Some(46), Some(6.45)),
    (1e-5, 3, 28500.0, Some(46), Some(6.49)),
    (1e-3, 0, 288.0, Some(33), Some(6.24)),
    (1e-3, 1, 340.0, Some(34), Some(6.3)),
    (1e-3, 2, 313.0, Some(34), Some(6.42)),
    (1e-3, 3, 289.0, Some(32), Some(6.46)),
    (1e-1, 0, 7.25, Some(22), Some(5.62)),
    (1e-1, 1, 7.33, Some(22), Some(5.6)),
    (1e-1, 2, 7.21, Some(22), Some(5.71)),
    (1e-1, 3, 7.13, Some(22), Some(5.73)),
    (1.0, 0, 5.53, Some(19), Some(5.17)),
    (1.0, 1, 5.76, Some(20), Some(5.45)),
    (1.0, 2, 5.8, Some(20), Some(5.46)),
    (1.0, 3, 5.83, Some(20), Some(5.46)),
    (1e1, 0, 6.66, Some(22), Some(5.91)),
    (1e1, 1, 7.16, Some(23), Some(6.2)),
    (1e1, 2, 7.16, Some(23), Some(6.25)),
    (1e1, 3, 7.43, Some(23), Some(6.27)),
    (1e3, 0, 6.38, Some(27), Some(5.51)),
    (1e3, 1, 8.98, Some(30), Some(6.53)),
    (1e3, 2, 11.1, Some(31), Some(6.59)),
    (1e3, 3, 13.5, Some(32), Some(6.59)),
    (1e5, 0, 6.91, Some(33), Some(6.38)),
    (1e5, 1, 9.02, Some(36), Some(6.54)),
    (1e5, 2, 11.3, Some(39), Some(6.6)),
    (1e5, 3, 13.8, Some(40), Some(6.59)),
];

pub const IIPG_PROPAGATOR: &[GoldenRow] = &[
    (1e-5, 0, 0.2, None, None),
    (1e-4, 0, 0.2, None, None),
    (1e-3, 0, 0.2, None, None),
    (1e-2, 0, 0.2, None, None),
    (1e-1, 0, 0.2, None, None),
    (1.0, 0, 0.2, None, None),
    (1e1, 0, 0.19, None, None),
    (1e2, 0, 0.19, None, None),
    (1e3, 0, 0.19, None, None),
    (1e4, 0, 0.19, None, None),
    (1e5, 0, 0.19, None, None),
    (1e-5, 1, 0.14, None, None),
    (1e-4, 1, 0.14, None, None),
    (1e-3, 1, 0.14, None, None),
    (1e-2, 1, 0.14, None, None),
    (1e-1, 1, 0.14, None, None),
    (1.0, 1, 0.14, None, None),
    (1e1, 1, 0.14, None, None),
    (1e2, 1, 0.14, None, None),
    (1e3, 1, 0.14, None, None),
    (1e4, 1, 0.14, None, None),
    (1e5, 1, 0.14, None, None),
    (1e-5, 2, 0.16, None, None),
    (1e-4, 2, 0.16, None, None),
    (1e-3, 2, 0.16, None, None),
    (1e-2, 2, 0.16, None, None),
    (1e-1, 2, 0.16, None, None),
    (1.0, 2, 0.15, None, None),
    (1e1, 2, 0.15, None, None),
    (1e2, 2, 0.16, None, None),
    (1e3, 2, 0.16, None, None),
    (1e4, 2, 0.16, None, None),
    (1e5, 2, 0.16, None, None),
    (1e-5, 3, 0.16, None, None),
    (1e-4, 3, 0.16, None, None),
    (1e-3, 3, 0.16, None, None),
    (1e-2, 3, 0.16, None, None),
    (1e-1, 3, 0.16, None, None),
    (1.0, 3, 0.16, None, None),
    (1e1, 3, 0.16, None, None),
    (1e2, 3, 0.16, None, None),
    (1e3, 3, 0.16, None, None),
    (1e4, 3, 0.16, None, None),
    (1e5, 3, 0.16, None, None),
];
