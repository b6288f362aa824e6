//! Kingsbury filter banks: near-symmetric 13,19-tap biorthogonal filters for
//! level 1 and 14-tap Q-shift filters for the coarser levels.

/// Level-1 biorthogonal filter set.
#[derive(Debug, Clone)]
pub struct Biort {
    pub h0o: Vec<f64>,
    pub g0o: Vec<f64>,
    pub h1o: Vec<f64>,
    pub g1o: Vec<f64>,
}

/// Q-shift filter set for levels >= 2.
#[derive(Debug, Clone)]
pub struct QShift {
    pub h0a: Vec<f64>,
    pub h0b: Vec<f64>,
    pub g0a: Vec<f64>,
    pub g0b: Vec<f64>,
    pub h1a: Vec<f64>,
    pub h1b: Vec<f64>,
    pub g1a: Vec<f64>,
    pub g1b: Vec<f64>,
}

pub const FILTER_SET_ID: &str = "near_sym_b/qshift_b";

impl Biort {
    pub fn near_sym_b() -> Self {
        let h0o = vec![
            -0.0017578125,
            0.0,
            0.022265625,
            -0.046875,
            -0.0482421875,
            0.296875,
            0.55546875,
            0.296875,
            -0.0482421875,
            -0.046875,
            0.022265625,
            0.0,
            -0.0017578125,
        ];
        let g0o = vec![
            7.062639508928571e-05,
            0.0,
            -0.0013419015066964285,
            -0.0018833705357142855,
            0.007156808035714285,
            0.023856026785714284,
            -0.05564313616071428,
            -0.05168805803571428,
            0.29975760323660716,
            0.5594308035714286,
            0.29975760323660716,
            -0.05168805803571428,
            -0.05564313616071428,
            0.023856026785714284,
            0.007156808035714285,
            -0.0018833705357142855,
            -0.0013419015066964285,
            0.0,
            7.062639508928571e-05,
        ];
        // h1o and g1o are the sign-modulated g0o and h0o
        let h1o = g0o
            .iter()
            .enumerate()
            .map(|(i, &v)| if (i + 1) % 2 == 0 { v } else { -v })
            .collect();
        let g1o = h0o
            .iter()
            .enumerate()
            .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
            .collect();
        Self { h0o, g0o, h1o, g1o }
    }
}

impl QShift {
    pub fn qshift_b() -> Self {
        let h0a = vec![
            0.003253142763653182,
            -0.00388321199915849,
            0.03466034684485349,
            -0.03887280126882779,
            -0.11720388769911527,
            0.27529538466888204,
            0.7561456438925225,
            0.5688104207121227,
            0.011866092033797,
            -0.1067118046866654,
            0.023825384794920298,
            0.01702522388155399,
            -0.005439475937274115,
            -0.004556895628475491,
        ];
        let h0b: Vec<f64> = h0a.iter().rev().copied().collect();
        let g0a = h0b.clone();
        let g0b = h0a.clone();
        // h1a[n] = (-1)^n h0b[n], h1b = reverse(h1a)
        let h1a: Vec<f64> = h0b
            .iter()
            .enumerate()
            .map(|(i, &v)| if i % 2 == 0 { v } else { -v })
            .collect();
        let h1b: Vec<f64> = h1a.iter().rev().copied().collect();
        let g1a = h1b.clone();
        let g1b = h1a.clone();
        Self {
            h0a,
            h0b,
            g0a,
            g0b,
            h1a,
            h1b,
            g1a,
            g1b,
        }
    }
}
