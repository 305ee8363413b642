//! Published reference rows for the builtin problems, transcribed digit for
//! digit. Exponents use the printed `D` notation; the comparator also reads
//! `e` and the exponent-only `5.17+157` form.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Columns {
    /// `|A_R - S|` and `|A^(0)_n - S|`.
    AbsoluteErrors,
    /// Errors divided by `|S|`; Λ is printed divided by `|S|` as well.
    RelativeErrors,
    /// `A_R` and `A^(0)_n` themselves (limit unknown).
    Values,
}

#[derive(Clone, Copy, Debug)]
pub struct Row {
    pub n: usize,
    pub r: u64,
    pub partial: &'static str,
    pub value: &'static str,
    pub gamma: &'static str,
    pub lambda: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub problem: &'static str,
    pub schedule: &'static str,
    pub columns: Columns,
    pub rows: &'static [Row],
}

impl Fixture {
    /// `"<problem> <schedule>"`, e.g. `"ex5_1 gps:1.3"`.
    pub fn key(&self) -> String {
        format!("{} {}", self.problem, self.schedule)
    }

    pub fn depth(&self) -> usize {
        self.rows.last().map_or(0, |r| r.n)
    }
}

const fn row(n: usize, r: u64, partial: &'static str, value: &'static str, gamma: &'static str, lambda: &'static str) -> Row {
    Row { n, r, partial, value, gamma, lambda }
}

pub static FIXTURES: &[Fixture] = &[
    Fixture {
        problem: "ex5_1",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "6.32D-01"),
            row(4, 5, "1.07D-01", "7.64D-02", "2.90D+02", "2.47D+02"),
            row(8, 9, "4.98D-02", "4.65D-04", "3.03D+04", "2.80D+04"),
            row(12, 13, "2.72D-02", "1.17D-06", "4.58D+06", "4.37D+06"),
            row(16, 17, "1.62D-02", "1.48D-09", "7.95D+08", "7.72D+08"),
            row(20, 21, "1.02D-02", "1.13D-12", "1.53D+11", "1.50D+11"),
            row(24, 25, "6.74D-03", "5.82D-16", "3.19D+13", "3.14D+13"),
            row(28, 29, "4.58D-03", "4.03D-19", "7.10D+15", "7.03D+15"),
            row(32, 33, "3.20D-03", "2.40D-17", "1.67D+18", "1.66D+18"),
            row(36, 37, "2.28D-03", "9.81D-15", "4.13D+20", "4.11D+20"),
            row(40, 41, "1.66D-03", "1.03D-12", "1.07D+23", "1.06D+23"),
        ],
    },
    Fixture {
        problem: "ex5_1",
        schedule: "gps:1.3",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "6.32D-01"),
            row(4, 5, "1.07D-01", "7.64D-02", "2.90D+02", "2.47D+02"),
            row(8, 11, "3.63D-02", "3.27D-04", "8.41D+03", "7.72D+03"),
            row(12, 29, "4.58D-03", "7.32D-08", "4.26D+03", "4.10D+03"),
            row(16, 80, "1.30D-04", "4.43D-13", "3.75D+02", "3.73D+02"),
            row(20, 227, "2.86D-07", "3.11D-20", "1.80D+01", "1.79D+01"),
            row(24, 646, "9.16D-12", "6.18D-30", "2.25D+00", "2.25D+00"),
            row(28, 1842, "2.29D-19", "0.00D+00", "1.10D+00", "1.10D+00"),
            row(32, 5258, "3.43D-32", "1.64D-33", "1.00D+00", "1.00D+00"),
        ],
    },
    Fixture {
        problem: "ex5_2",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "1.37D+00"),
            row(4, 5, "1.07D-01", "4.16D-04", "1.00D+00", "1.00D+00"),
            row(8, 9, "4.98D-02", "3.33D-08", "1.00D+00", "1.00D+00"),
            row(12, 13, "2.72D-02", "6.71D-13", "1.00D+00", "1.00D+00"),
            row(16, 17, "1.62D-02", "5.61D-18", "1.00D+00", "1.00D+00"),
            row(20, 21, "1.02D-02", "2.48D-23", "1.00D+00", "1.00D+00"),
            row(24, 25, "6.74D-03", "6.72D-29", "1.00D+00", "1.00D+00"),
            row(28, 29, "4.58D-03", "4.81D-34", "1.00D+00", "1.00D+00"),
            row(32, 33, "3.20D-03", "3.85D-34", "1.00D+00", "1.00D+00"),
        ],
    },
    Fixture {
        problem: "ex5_3",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "2.72D+00", "2.72D+00", "1.00D+00", "1.72D+00"),
            row(4, 5, "9.36D+00", "2.60D+00", "3.13D+02", "1.65D+03"),
            row(8, 9, "2.01D+01", "2.10D+00", "1.03D+06", "1.17D+07"),
            row(12, 13, "3.68D+01", "5.08D-01", "5.04D+09", "1.01D+11"),
            row(16, 17, "6.18D+01", "8.73D-03", "4.72D+12", "1.51D+14"),
            row(20, 21, "9.78D+01", "1.64D-04", "9.85D+15", "4.75D+17"),
            row(24, 25, "1.48D+02", "3.52D-06", "4.11D+19", "2.86D+21"),
            row(28, 29, "2.18D+02", "4.14D-09", "1.23D+22", "1.20D+24"),
            row(32, 33, "3.12D+02", "1.67D-06", "2.04D+25", "2.73D+27"),
            row(36, 37, "4.38D+02", "2.14D-03", "8.15D+28", "1.46D+31"),
            row(40, 41, "6.04D+02", "1.52D+01", "2.76D+31", "6.56D+33"),
        ],
    },
    Fixture {
        problem: "ex5_3",
        schedule: "gps:1.3",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "2.72D+00", "2.72D+00", "1.00D+00", "1.72D+00"),
            row(4, 5, "9.36D+00", "2.60D+00", "3.13D+02", "1.65D+03"),
            row(8, 11, "2.76D+01", "2.09D+00", "4.93D+05", "5.04D+06"),
            row(12, 29, "2.18D+02", "3.33D-01", "4.81D+07", "8.42D+08"),
            row(16, 80, "7.66D+03", "8.33D-04", "7.10D+07", "4.11D+09"),
            row(20, 227, "3.49D+06", "9.80D-08", "1.18D+07", "4.57D+09"),
            row(24, 646, "1.09D+11", "1.16D-11", "5.10D+06", "3.60D+10"),
            row(28, 1842, "4.36D+18", "3.04D-16", "1.23D+06", "5.38D+11"),
            row(32, 5258, "3.10D+31", "2.83D-19", "2.73D+05", "2.55D+13"),
        ],
    },
    Fixture {
        problem: "ex5_4",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "2.72D+00", "2.72D+00", "1.00D+00", "3.72D+00"),
            row(4, 5, "9.36D+00", "1.17D-02", "1.00D+00", "5.94D+00"),
            row(8, 9, "2.01D+01", "4.17D-06", "1.00D+00", "1.20D+01"),
            row(12, 13, "3.68D+01", "2.55D-10", "1.00D+00", "2.06D+01"),
            row(16, 17, "6.18D+01", "5.40D-15", "1.00D+00", "3.24D+01"),
            row(20, 21, "9.78D+01", "5.43D-20", "1.00D+00", "4.85D+01"),
            row(24, 25, "1.48D+02", "3.07D-25", "1.00D+00", "6.98D+01"),
            row(28, 29, "2.18D+02", "1.10D-30", "1.00D+00", "9.76D+01"),
            row(32, 33, "3.12D+02", "3.85D-33", "1.00D+00", "1.33D+02"),
        ],
    },
    Fixture {
        problem: "ex5_5",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "2.72D+00", "2.71828182845904523536028747135266231D+00", "1.00D+00", "2.72D+00"),
            row(4, 5, "2.92D+01", "1.25526985654591147597524366280725429D+00", "1.36D+03", "1.95D+04"),
            row(8, 9, "9.19D+01", "1.24677273910725248869144831373621801D+00", "3.82D+06", "1.69D+08"),
            row(12, 13, "2.12D+02", "1.24627554920630442266529384719068750D+00", "1.07D+10", "1.03D+12"),
            row(16, 17, "4.18D+02", "1.24628333168062508590422433878661035D+00", "5.25D+13", "9.49D+15"),
            row(20, 21, "7.52D+02", "1.24628299284466085557931505666022122D+00", "1.41D+16", "4.35D+18"),
            row(24, 25, "1.26D+03", "1.24628299466999557367176182613152417D+00", "1.73D+19", "8.56D+21"),
            row(28, 29, "2.03D+03", "1.24628299198356711403961152832133262D+00", "9.02D+22", "6.81D+25"),
            row(32, 33, "3.12D+03", "1.24628324241958617654595744535696746D+00", "4.54D+25", "5.06D+28"),
        ],
    },
    Fixture {
        problem: "ex5_5",
        schedule: "gps:1.3",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "2.72D+00", "2.71828182845904523536028747135266231D+00", "1.00D+00", "2.72D+00"),
            row(4, 5, "2.92D+01", "1.25526985654591147597524366280725429D+00", "1.36D+03", "1.95D+04"),
            row(8, 11, "1.43D+02", "1.24671505638378127944673235454440382D+00", "1.57D+06", "5.94D+07"),
            row(12, 29, "2.03D+03", "1.24628218609008659057856308239992091D+00", "2.73D+07", "2.12D+09"),
            row(16, 80, "1.26D+05", "1.24628298810418632879233471192843094D+00", "3.94D+07", "1.36D+10"),
            row(20, 227, "1.00D+08", "1.24628299465099003773467908406255098D+00", "1.53D+08", "5.13D+11"),
            row(24, 646, "5.39D+12", "1.24628299466148082969324108233096056D+00", "7.47D+06", "6.44D+11"),
            row(28, 1842, "3.68D+20", "1.24628299466148185365143315380862845D+00", "1.79D+06", "1.31D+13"),
            row(32, 5258, "4.45D+33", "1.24628299466148185195182683756923951D+00", "1.84D+06", "3.78D+15"),
        ],
    },
    Fixture {
        problem: "ex5_6",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "-2.72D+00", "-2.71828182845904523536028747135266231D+00", "1.00D+00", "2.72D+00"),
            row(4, 5, "-6.22D+00", "-1.02389938149412728674621319253264616D+00", "1.00D+00", "3.42D+00"),
            row(8, 9, "-1.19D+01", "-1.02396073254025925488406911517938308D+00", "1.00D+00", "6.63D+00"),
            row(12, 13, "-2.07D+01", "-1.02396073204910424017949474942021129D+00", "1.00D+00", "1.12D+01"),
            row(16, 17, "-3.38D+01", "-1.02396073204906060742047437248544015D+00", "1.00D+00", "1.74D+01"),
            row(20, 21, "-5.26D+01", "-1.02396073204906060526543006429244242D+00", "1.00D+00", "2.58D+01"),
            row(24, 25, "-7.89D+01", "-1.02396073204906060526534757271439465D+00", "1.00D+00", "3.70D+01"),
            row(28, 29, "-1.15D+02", "-1.02396073204906060526534757003586791D+00", "1.00D+00", "5.15D+01"),
            row(32, 33, "-1.64D+02", "-1.02396073204906060526534757003580917D+00", "1.00D+00", "7.01D+01"),
        ],
    },
    Fixture {
        problem: "ex5_7",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "2.23D+00", "2.23D+00", "1.00D+00", "1.23D+00"),
            row(8, 9, "3.32D+00", "3.48D+00", "1.31D+00", "3.24D+00"),
            row(16, 17, "2.06D+00", "3.48D+00", "9.01D+01", "1.69D+02"),
            row(24, 25, "1.00D+00", "3.48D+00", "1.21D+07", "1.02D+07"),
            row(32, 33, "4.25D-01", "3.45D+00", "4.43D+13", "8.27D+12"),
            row(40, 41, "1.66D-01", "2.46D-02", "8.99D+18", "3.96D+18"),
            row(48, 49, "6.08D-02", "3.83D-07", "1.74D+22", "1.25D+22"),
            row(56, 57, "2.13D-02", "5.44D-10", "3.32D+25", "2.87D+25"),
            row(64, 65, "7.17D-03", "9.33D-06", "6.27D+28", "5.87D+28"),
        ],
    },
    Fixture {
        problem: "ex5_7",
        schedule: "aps:5,5",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 5, "3.44D+00", "3.44D+00", "1.00D+00", "2.44D+00"),
            row(4, 25, "1.00D+00", "4.08D+00", "1.47D+01", "1.54D+01"),
            row(8, 45, "1.01D-01", "1.47D-02", "2.50D+02", "1.59D+02"),
            row(12, 65, "7.17D-03", "1.01D-06", "1.03D+03", "9.79D+02"),
            row(16, 85, "4.18D-04", "1.91D-11", "4.53D+03", "4.50D+03"),
            row(20, 105, "2.14D-05", "1.48D-16", "2.00D+04", "2.00D+04"),
            row(24, 125, "9.96D-07", "5.84D-22", "8.86D+04", "8.86D+04"),
            row(28, 145, "4.32D-08", "1.34D-27", "3.90D+05", "3.90D+05"),
            row(32, 165, "1.77D-09", "5.29D-29", "1.71D+06", "1.71D+06"),
        ],
    },
    Fixture {
        problem: "ex5_8",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "2.23D+00", "2.23D+00", "1.00D+00", "3.23D+00"),
            row(4, 5, "3.44D+00", "7.30D-03", "1.00D+00", "3.12D+00"),
            row(8, 9, "3.32D+00", "1.43D-06", "1.00D+00", "3.45D+00"),
            row(12, 13, "2.73D+00", "4.81D-11", "1.00D+00", "3.24D+00"),
            row(16, 17, "2.06D+00", "5.60D-16", "1.00D+00", "2.80D+00"),
            row(20, 21, "1.47D+00", "3.09D-21", "1.00D+00", "2.30D+00"),
            row(24, 25, "1.00D+00", "9.60D-27", "1.00D+00", "1.82D+00"),
            row(28, 29, "6.60D-01", "2.06D-32", "1.00D+00", "1.40D+00"),
            row(32, 33, "4.25D-01", "2.12D-33", "1.00D+00", "1.12D+00"),
        ],
    },
    Fixture {
        problem: "ex5_9",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "2.23D+00", "2.22554092849246760457953753139507683D+00", "1.00D+00", "2.23D+00"),
            row(8, 9, "2.85D+01", "6.91041025116709498367466955167170379D+01", "3.07D+05", "6.07D+06"),
            row(16, 17, "4.97D+01", "6.94975935915328024186339724785494270D+01", "6.45D+08", "2.51D+10"),
            row(24, 25, "6.11D+01", "6.94975997601623491994988589397430127D+01", "1.42D+12", "7.43D+13"),
            row(32, 33, "6.62D+01", "6.94975997602064996307484910836876701D+01", "3.03D+15", "1.83D+17"),
            row(40, 41, "6.83D+01", "6.94975997602064916366549830540673670D+01", "6.29D+18", "4.09D+20"),
            row(48, 49, "6.91D+01", "6.94975997601806743910266253659572031D+01", "1.27D+22", "8.57D+23"),
            row(56, 57, "6.94D+01", "6.94975997308245777099536081393349112D+01", "2.52D+25", "1.72D+27"),
            row(64, 65, "6.95D+01", "6.94975821438721079747682396283208104D+01", "4.89D+28", "3.37D+30"),
        ],
    },
    Fixture {
        problem: "ex5_9",
        schedule: "aps:5,5",
        columns: Columns::Values,
        rows: &[
            row(0, 5, "1.48D+01", "1.48469162378884426206684133887622417D+01", "1.00D+00", "1.48D+01"),
            row(4, 25, "6.11D+01", "6.96296394954322519778004220754137383D+01", "5.01D+01", "2.57D+03"),
            row(8, 45, "6.88D+01", "6.94976035518697374035719835887475438D+01", "2.02D+02", "1.34D+04"),
            row(12, 65, "6.95D+01", "6.94975997601454883646767731022889718D+01", "9.03D+02", "6.25D+04"),
            row(16, 85, "6.95D+01", "6.94975997602064989300261396945842564D+01", "4.09D+03", "2.84D+05"),
            row(20, 105, "6.95D+01", "6.94975997602064988540120840350043551D+01", "1.84D+04", "1.28D+06"),
            row(24, 125, "6.95D+01", "6.94975997602064988540031066443388019D+01", "8.24D+04", "5.72D+06"),
            row(28, 145, "6.95D+01", "6.94975997602064988540031067912671900D+01", "3.66D+05", "2.54D+07"),
            row(32, 165, "6.95D+01", "6.94975997602064988540031067892774609D+01", "1.62D+06", "1.12D+08"),
        ],
    },
    Fixture {
        problem: "ex5_10",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "-4.49D-01", "-4.49328964117221591430102385015562784D-01", "1.00D+00", "4.49D-01"),
            row(4, 5, "-3.98D-01", "-2.54755240466624695829767367307432419D-01", "1.00D+00", "2.55D-01"),
            row(8, 9, "-4.08D-01", "-2.54747573868605037684471045364090490D-01", "1.00D+00", "2.55D-01"),
            row(12, 13, "-4.43D-01", "-2.54747573734873382943870173850446560D-01", "1.00D+00", "2.55D-01"),
            row(16, 17, "-5.07D-01", "-2.54747573734869455944444615389169251D-01", "1.00D+00", "2.55D-01"),
            row(20, 21, "-6.11D-01", "-2.54747573734869455818166677569691476D-01", "1.00D+00", "2.58D-01"),
            row(24, 25, "-7.80D-01", "-2.54747573734869455818162487122226260D-01", "1.00D+00", "2.88D-01"),
            row(28, 29, "-1.05D+00", "-2.54747573734869455818162486982736643D-01", "1.00D+00", "3.62D-01"),
            row(32, 33, "-1.50D+00", "-2.54747573734869455818162486982731683D-01", "1.00D+00", "4.78D-01"),
            row(36, 37, "-2.23D+00", "-2.54747573734869455818162486982731443D-01", "1.00D+00", "6.44D-01"),
            row(40, 41, "-3.45D+00", "-2.54747573734869455818162486982731587D-01", "1.00D+00", "8.81D-01"),
        ],
    },
    Fixture {
        problem: "ex5_11",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "6.32D-01"),
            row(4, 5, "1.17D+00", "3.51D-01", "1.36D+00", "7.80D-01"),
            row(8, 9, "3.00D+01", "3.49D-01", "2.69D+01", "3.27D+01"),
            row(12, 13, "2.14D+03", "3.19D-01", "4.62D+03", "7.39D+04"),
            row(16, 17, "3.05D+05", "7.75D-01", "5.67D+06", "1.17D+09"),
            row(20, 21, "7.31D+07", "7.03D-04", "4.73D+06", "1.58D+10"),
            row(24, 25, "2.65D+10", "4.63D-06", "4.41D+07", "2.91D+12"),
            row(28, 29, "1.36D+13", "3.89D-07", "7.38D+09", "1.14D+16"),
            row(32, 33, "9.43D+15", "9.10D-11", "4.51D+09", "1.89D+17"),
            row(36, 37, "8.47D+18", "4.21D-13", "6.94D+10", "8.89D+19"),
            row(40, 41, "9.58D+21", "1.53D-12", "4.90D+11", "2.14D+22"),
        ],
    },
    Fixture {
        problem: "ex5_11",
        schedule: "gps:1.1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "6.32D-01"),
            row(4, 5, "1.17D+00", "3.51D-01", "1.36D+00", "7.80D-01"),
            row(8, 9, "3.00D+01", "3.49D-01", "2.69D+01", "3.27D+01"),
            row(12, 13, "2.14D+03", "3.19D-01", "4.62D+03", "7.39D+04"),
            row(16, 17, "3.05D+05", "7.75D-01", "5.67D+06", "1.17D+09"),
            row(20, 22, "3.08D+08", "6.83D-04", "4.35D+06", "1.34D+10"),
            row(24, 30, "6.81D+13", "6.10D-06", "2.88D+07", "7.03D+11"),
            row(28, 42, "5.74D+22", "2.52D-08", "6.18D+07", "6.43D+12"),
            row(32, 60, "3.95D+37", "1.93D-10", "1.72D+08", "5.79D+13"),
            row(36, 86, "1.46D+61", "1.02D-12", "2.38D+08", "3.10D+14"),
            row(40, 124, "5.66D+98", "3.00D-15", "1.44D+08", "1.42D+15"),
            row(44, 179, "5.17+157", "9.37D-18", "7.85D+07", "1.27D+16"),
            row(48, 259, "1.24+250", "2.65D-17", "6.87D+07", "4.18D+17"),
        ],
    },
    Fixture {
        problem: "ex5_12",
        schedule: "aps:1,1",
        columns: Columns::AbsoluteErrors,
        rows: &[
            row(0, 1, "3.68D-01", "3.68D-01", "1.00D+00", "1.37D+00"),
            row(4, 5, "1.17D+00", "9.49D-04", "1.00D+00", "9.99D-01"),
            row(8, 9, "3.00D+01", "6.69D-07", "1.00D+00", "2.50D+00"),
            row(12, 13, "2.14D+03", "1.81D-10", "1.00D+00", "1.96D+01"),
            row(16, 17, "3.05D+05", "2.79D-14", "1.00D+00", "2.37D+02"),
            row(20, 21, "7.31D+07", "2.87D-18", "1.00D+00", "3.76D+03"),
            row(24, 25, "2.65D+10", "2.16D-22", "1.00D+00", "7.38D+04"),
            row(28, 29, "1.36D+13", "1.25D-26", "1.00D+00", "1.72D+06"),
            row(32, 33, "9.43D+15", "1.95D-28", "1.00D+00", "4.64D+07"),
            row(36, 37, "8.47D+18", "2.77D-27", "1.00D+00", "1.42D+09"),
            row(40, 41, "9.58D+21", "2.54D-24", "1.00D+00", "4.82D+10"),
        ],
    },
    Fixture {
        problem: "ex5_13",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "-3.68D-01", "-3.67879441171442321595523770161460873D-01", "1.00D+00", "3.68D-01"),
            row(4, 5, "-9.65D-01", "-2.05445994186455599969353796265963566D-01", "1.00D+00", "3.18D-01"),
            row(8, 9, "-2.18D+01", "-2.05408671703611238491707363340804563D-01", "1.00D+00", "1.55D+00"),
            row(12, 13, "-1.63D+03", "-2.05408680194850300292719482233526514D-01", "1.00D+00", "1.37D+01"),
            row(16, 17, "-2.40D+05", "-2.05408680199979555770776037771120370D-01", "1.00D+00", "1.71D+02"),
            row(20, 21, "-5.88D+07", "-2.05408680199983779970682276964493250D-01", "1.00D+00", "2.80D+03"),
            row(24, 25, "-2.17D+10", "-2.05408680199983784675881316821330617D-01", "1.00D+00", "5.62D+04"),
            row(28, 29, "-1.13D+13", "-2.05408680199983784682423139886832961D-01", "1.00D+00", "1.33D+06"),
            row(32, 33, "-7.93D+15", "-2.05408680199983784682433513602872466D-01", "1.00D+00", "3.64D+07"),
        ],
    },
    Fixture {
        problem: "ex5_14",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "5.00D-01", "5.00000000000000000000000000000000000D-01", "1.00D+00", "5.00D-01"),
            row(4, 5, "1.30D+01", "1.36953249947897007206016802576582650D-02", "1.05D+02", "4.99D+02"),
            row(8, 9, "4.83D+01", "2.14934104105471257196163245799915443D+01", "5.87D+09", "1.24D+11"),
            row(12, 13, "1.11D+02", "-6.36685109382204842916350986273167363D+00", "1.48D+13", "7.52D+14"),
            row(16, 17, "2.05D+02", "-6.33514738456051770232899035920678815D+00", "9.82D+16", "9.45D+18"),
            row(20, 21, "3.31D+02", "-6.33490882742039134712027408229034021D+00", "4.83D+20", "7.64D+22"),
            row(24, 25, "4.93D+02", "-6.33489970412111983179650131962681705D+00", "1.91D+24", "4.55D+26"),
            row(28, 29, "6.93D+02", "-6.33485606274876151464675840216981192D+00", "6.50D+27", "2.19D+30"),
            row(32, 33, "9.31D+02", "-6.23505348202801983168713408136424401D+00", "1.98D+31", "9.00D+33"),
        ],
    },
    Fixture {
        problem: "ex5_14",
        schedule: "gps:1.3",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "5.00D-01", "5.00000000000000000000000000000000000D-01", "1.00D+00", "5.00D-01"),
            row(4, 5, "1.30D+01", "1.36953249947897007206016802576582650D-02", "1.05D+02", "4.99D+02"),
            row(8, 11, "7.60D+01", "2.83889899046696906432360234712697271D+01", "3.39D+09", "5.96D+10"),
            row(12, 29, "6.93D+02", "-6.35474899562491078540752450507974049D+00", "7.70D+10", "3.14D+12"),
            row(16, 80, "7.04D+03", "-6.33492046280468404096402239913451429D+00", "6.28D+11", "1.26D+14"),
            row(20, 227, "7.53D+04", "-6.33489959483428057932844060172892160D+00", "1.50D+12", "2.25D+15"),
            row(24, 646, "8.00D+05", "-6.33489961177427644581715415787437553D+00", "1.99D+12", "3.00D+16"),
            row(28, 1842, "8.45D+06", "-6.33489961177942835930816940226182462D+00", "2.32D+12", "3.74D+17"),
            row(32, 5258, "8.89D+07", "-6.33489961177942862235369239450355880D+00", "2.57D+12", "4.30D+18"),
        ],
    },
    Fixture {
        problem: "ex7_1",
        schedule: "aps:1,1",
        columns: Columns::RelativeErrors,
        rows: &[
            row(0, 1, "1.78D-01", "1.78D-01", "1.00D+00", "1.18D+00"),
            row(4, 5, "4.64D-02", "6.53D-03", "8.81D+01", "9.33D+01"),
            row(8, 9, "2.67D-02", "3.75D-06", "1.11D+04", "1.14D+04"),
            row(12, 13, "1.87D-02", "3.16D-10", "1.56D+06", "1.60D+06"),
            row(16, 17, "1.44D-02", "7.34D-15", "2.29D+08", "2.33D+08"),
            row(20, 21, "1.17D-02", "6.56D-20", "3.44D+10", "3.49D+10"),
            row(24, 25, "9.85D-03", "1.95D-21", "5.26D+12", "5.33D+12"),
            row(28, 29, "8.51D-03", "4.89D-19", "8.15D+14", "8.24D+14"),
            row(32, 33, "7.49D-03", "6.42D-17", "1.27D+17", "1.29D+17"),
        ],
    },
    Fixture {
        problem: "ex7_1",
        schedule: "gps:1.3",
        columns: Columns::RelativeErrors,
        rows: &[
            row(0, 1, "1.78D-01", "1.78D-01", "1.00D+00", "1.18D+00"),
            row(4, 5, "4.64D-02", "6.53D-03", "8.81D+01", "9.33D+01"),
            row(8, 11, "2.20D-02", "2.62D-06", "2.92D+03", "3.02D+03"),
            row(12, 29, "8.51D-03", "1.93D-11", "3.30D+03", "3.36D+03"),
            row(16, 80, "3.11D-03", "2.41D-18", "2.74D+03", "2.76D+03"),
            row(20, 227, "1.10D-03", "9.18D-27", "2.09D+03", "2.09D+03"),
            row(24, 646, "3.87D-04", "2.22D-30", "1.90D+03", "1.90D+03"),
            row(28, 1842, "1.36D-04", "2.38D-30", "1.82D+03", "1.82D+03"),
            row(32, 5258, "4.75D-05", "1.81D-29", "1.78D+03", "1.78D+03"),
        ],
    },
    Fixture {
        problem: "ex7_2",
        schedule: "aps:1,1",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "2.00D+00", "2.00000000000000000000000000000000000D+00", "1.00D+00", "2.00D+00"),
            row(4, 5, "3.96D+00", "1.35479942920362927909756560802876967D+00", "2.68D+02", "9.27D+02"),
            row(8, 9, "4.82D+00", "-1.57042116160622622622411746352944801D+01", "6.43D+06", "2.80D+07"),
            row(12, 13, "5.35D+00", "9.53022999002732270167986334118038986D+00", "3.05D+09", "1.50D+10"),
            row(16, 17, "5.71D+00", "9.20517119198173662410564570330512235D+00", "3.61D+12", "1.91D+13"),
            row(20, 21, "5.98D+00", "9.20093271469623484626893604230623342D+00", "4.70D+15", "2.62D+16"),
            row(24, 25, "6.19D+00", "9.20090135744934917522373022100561298D+00", "6.32D+18", "3.68D+19"),
            row(28, 29, "6.37D+00", "9.20090121361950832779877985491595492D+00", "8.69D+21", "5.22D+22"),
            row(32, 33, "6.51D+00", "9.20090126648125570503784378346976091D+00", "1.21D+25", "7.48D+25"),
        ],
    },
    Fixture {
        problem: "ex7_2",
        schedule: "gps:1.3",
        columns: Columns::Values,
        rows: &[
            row(0, 1, "2.00D+00", "2.00000000000000000000000000000000000D+00", "1.00D+00", "2.00D+00"),
            row(4, 5, "3.96D+00", "1.35479942920362927909756560802876967D+00", "2.68D+02", "9.27D+02"),
            row(8, 11, "5.11D+00", "-6.33525823410437784195106051773687585D+01", "7.84D+06", "3.33D+07"),
            row(12, 29, "6.37D+00", "9.25531467665752588697176832427936420D+00", "6.64D+06", "3.28D+07"),
            row(16, 80, "7.36D+00", "9.20093404854746290206845604435639641D+00", "1.23D+07", "7.46D+07"),
            row(20, 227, "8.06D+00", "9.20090121511720760645832075667746101D+00", "1.35D+07", "9.54D+07"),
            row(24, 646, "8.50D+00", "9.20090121315935366161482143819303662D+00", "1.37D+07", "1.08D+08"),
            row(28, 1842, "8.78D+00", "9.20090121315934117116570190908213652D+00", "1.42D+07", "1.19D+08"),
            row(32, 5258, "8.95D+00", "9.20090121315934117115672682505231045D+00", "1.45D+07", "1.26D+08"),
        ],
    },
];

pub fn find(problem: &str, schedule: Option<&str>) -> Vec<&'static Fixture> {
    FIXTURES
        .iter()
        .filter(|f| f.problem == problem && schedule.is_none_or(|s| s == f.schedule))
        .collect()
}
