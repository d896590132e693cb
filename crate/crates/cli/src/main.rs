fn main() { println!("{}", thz_entangle_core::qm::smoke()); }
