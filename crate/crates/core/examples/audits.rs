//! The invariant battery, first as shipped and then with a corrupted
//! Bregman divergence.

use switchmd::verify::{verify_suite, Fault, SuiteOptions};

fn main() {
    let clean = verify_suite(&SuiteOptions::default());
    print!("{clean}");
    let broken = verify_suite(&SuiteOptions { fault: Some(Fault::CorruptBregman), ..SuiteOptions::default() });
    println!("with corrupted Bregman divergence, failing: {:?}", broken.failing());
}
