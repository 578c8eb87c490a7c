#![no_main]

use libfuzzer_sys::fuzz_target;
use lotforge::instance::{check_feasible, cost, gen_kc_gap, OrderSchedule};
use lotforge::num::int;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(sched) = OrderSchedule::from_json_str(text) else { return };
    let again = OrderSchedule::from_json_str(&sched.to_json_string()).expect("own output parses");
    assert_eq!(again, sched);
    // Arbitrary periods and item indices must be reported, never indexed blindly.
    let inst = gen_kc_gap(&int(10)).expect("valid scale");
    let report = check_feasible(&inst, &sched);
    assert_eq!(report.is_feasible(), cost(&inst, &sched).is_ok());
});
