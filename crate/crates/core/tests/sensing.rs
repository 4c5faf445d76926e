use gcmp::sensing::{arith, MeasurementPacket, Observation, SensingOperator, SensingSpec};
use gcmp::{Dims, Image};
use proptest::prelude::*;

proptest! {
    #[test]
    fn adjoint_is_transpose(
        seed in 0u64..1000, rate in 0.05f64..1.0,
        x in prop::collection::vec(-100.0f64..100.0, 20 * 24),
        y in prop::collection::vec(-100.0f64..100.0, 20 * 24),
    ) {
        let dims = Dims::new(20, 24);
        let op = SensingOperator::new(SensingSpec::from_rate(dims, rate, seed).unwrap()).unwrap();
        let y = &y[..op.measurements()];
        let lhs: f64 = op.apply(&x).iter().zip(y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(op.adjoint(y)).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn packet_bytes_round_trip(
        seed in 0u64..1000, bits in 1u8..9, rate in 0.02f64..1.0,
        pixels in prop::collection::vec(0u8..=255, 16 * 18),
    ) {
        let dims = Dims::new(16, 18);
        let img = Image::from_vec(dims, pixels.iter().map(|&p| p as f64).collect()).unwrap();
        let packet = MeasurementPacket::encode(&img, SensingSpec::from_rate(dims, rate, seed).unwrap(), bits).unwrap();
        let bytes = packet.to_bytes().unwrap();
        let back = MeasurementPacket::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &packet);
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        // Every dequantized measurement sits inside its own cell.
        let obs = Observation::<f64>::new(&back).unwrap();
        for i in 0..obs.len() {
            prop_assert!(obs.lo[i] <= obs.y_hat[i] && obs.y_hat[i] <= obs.hi[i]);
        }
    }

    #[test]
    fn coder_round_trips(bits in 1u8..17, seq in prop::collection::vec(any::<u32>(), 0..200)) {
        let seq: Vec<u32> = seq.iter().map(|v| v % (1u32 << bits)).collect();
        let bytes = arith::encode(&seq, bits).unwrap();
        prop_assert_eq!(arith::decode(&bytes, seq.len(), bits).unwrap(), seq);
    }
}

#[test]
fn corrupt_packets_are_rejected() {
    let dims = Dims::new(8, 8);
    let img = Image::from_fn(dims, |x, y| (x * 30 + y) as f64);
    let bytes = MeasurementPacket::encode(&img, SensingSpec::from_rate(dims, 0.5, 1).unwrap(), 3)
        .unwrap()
        .to_bytes()
        .unwrap();
    assert!(MeasurementPacket::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut flipped = bytes.clone();
    let last = flipped.len() - 1;
    flipped[last] ^= 0x40;
    assert!(MeasurementPacket::from_bytes(&flipped).is_err());
    assert!(MeasurementPacket::from_bytes(b"nope").is_err());
}
