"""Block-coder geometry, round trips, and detection guarantees."""

import math
import random

import numpy as np
import pytest

from bansim.errors import CodewordError, TruncatedFrame
from bansim.phy.fec import coded_length, decode_blocks, encode_blocks


def random_bits(rng, n):
    return np.array([rng.randrange(2) for _ in range(n)], dtype=np.uint8)


@pytest.mark.parametrize("code", [(31, 19), (63, 51)])
def test_round_trip_random_lengths(code):
    rng = random.Random(f"fec-{code}")
    for _ in range(50):
        n_bits = rng.randrange(1, 400)
        bits = random_bits(rng, n_bits)
        image = encode_blocks(bits, code)
        assert np.array_equal(decode_blocks(image, code, n_bits), bits)


@pytest.mark.parametrize("code", [(31, 19), (63, 51)])
def test_rate_expansion_arithmetic(code):
    # Expected size computed here from first principles, not via the library.
    n, k = code
    rng = random.Random(7)
    for n_bits in (1, k - 1, k, k + 1, 3 * k, 200):
        image = encode_blocks(random_bits(rng, n_bits), code)
        assert len(image) == math.ceil(n_bits / k) * n
        assert coded_length(n_bits, code) == len(image)


def test_empty_input_encodes_to_nothing():
    assert len(encode_blocks(np.zeros(0, dtype=np.uint8), (63, 51))) == 0
    assert len(decode_blocks(np.zeros(0, dtype=np.uint8), (63, 51), 0)) == 0


@pytest.mark.parametrize("code", [(31, 19), (63, 51)])
def test_every_single_bit_flip_detected(code):
    rng = random.Random(f"flip-{code}")
    bits = random_bits(rng, code[1] + 5)  # two codewords
    image = encode_blocks(bits, code)
    for pos in range(len(image)):
        mutated = image.copy()
        mutated[pos] ^= 1
        with pytest.raises(CodewordError):
            decode_blocks(mutated, code, len(bits))


def test_nonzero_pad_bits_detected():
    code = (63, 51)
    bits = random_bits(random.Random(3), 40)  # 11 pad bits in the codeword
    image = encode_blocks(bits, code)
    # Forge an image whose pad region is nonzero but whose parity is valid.
    padded = np.concatenate([bits, np.zeros(11, dtype=np.uint8)])
    padded[45] = 1
    forged = encode_blocks(padded, code)
    assert len(forged) == len(image)
    with pytest.raises(CodewordError):
        decode_blocks(forged, code, 40)


def test_short_image_is_truncation():
    bits = random_bits(random.Random(4), 60)
    image = encode_blocks(bits, (63, 51))
    with pytest.raises(TruncatedFrame):
        decode_blocks(image[:-1], (63, 51), 60)


def test_identity_code_is_a_passthrough():
    bits = random_bits(random.Random(5), 63)
    image = encode_blocks(bits, (63, 63))
    assert np.array_equal(image, bits)
    assert np.array_equal(decode_blocks(image, (63, 63), 63), bits)
