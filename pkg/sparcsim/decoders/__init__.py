from sparcsim.decoders.amp import SampDecoder
from sparcsim.decoders.base import DecodeResult, Decoder, DecoderConfig
from sparcsim.decoders.ml import MlDecoder
from sparcsim.decoders.mlmp import MlmpDecoder
from sparcsim.decoders.omp import BompDecoder, MbompDecoder

DECODERS = {
    "mlmp": MlmpDecoder,
    "mbomp": MbompDecoder,
    "bomp": BompDecoder,
    "samp": SampDecoder,
    "ml": MlDecoder,
}

__all__ = ["DECODERS", "DecodeResult", "Decoder", "DecoderConfig", "get_decoder"]


def get_decoder(name, **params):
    if name not in DECODERS:
        raise ValueError(f"Unknown decoder: {name}. Available: {list(DECODERS.keys())}")
    return DECODERS[name](**params)
