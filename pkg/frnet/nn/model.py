import configparser
import io
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..autodiff.tape import Tape
from ..core.errors import ShapeError
from ..core.profiling import profile
from ..core.tensor import Tensor
from ..fft.plan import is_power_of_two
from .blocks import FFTResidualBlock, InvertedResidualBlock
from .layers import ConvNormAct, GlobalAvgPool, Linear
from .module import Module, Sequential

#: the ablation switches of ModelConfig
ABLATIONS = ("disable_fft_residual_block", "disable_fft_encoder",
             "disable_concat_shortcut", "disable_encoder_shortcut")

# config fields that hold a tuple of ints
_TUPLE_FIELDS = ("stage_channels", "stage_blocks", "encoder_dims", "encoders_per_block")
_TUPLE_LENGTHS = {"stage_channels": 5, "stage_blocks": 3, "encoder_dims": 3, "encoders_per_block": 3}


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture of FR-Net. The defaults describe the full model at 3x256x256
    (about 0.68M parameters, 0.23B FLOPs).
    """
    #: side length of the square input image, a power of two >= 32
    input_size: int = 256
    #: image channels
    in_channels: int = 3
    #: channels C1..C5: stem, stage 2, stage 3 (first FFT Residual Block), 4th and 5th stage
    stage_channels: Tuple[int, ...] = (16, 24, 48, 64, 80)
    #: inverted residual blocks at C1 (stride 1), at C2 and at C3 (each stage starts with a stride 2 block)
    stage_blocks: Tuple[int, ...] = (0, 1, 1)
    #: dimension of the FFT Encoders of the three FFT Residual Blocks
    encoder_dims: Tuple[int, ...] = (64, 80, 96)
    #: number of stacked FFT Encoders per FFT Residual Block
    encoders_per_block: Tuple[int, ...] = (1, 4, 3)
    #: channels of the final 1x1 convolution
    head_channels: int = 320
    #: outputs: yaw and pitch
    output_dims: int = 2
    #: hidden width ratio of the encoder feed-forward networks
    ffn_expansion: int = 2
    #: hidden width ratio of the inverted residual blocks
    irb_expansion: int = 2
    #: depthwise (True) or full (False) local 3x3 convolution in the FFT Residual Blocks
    depthwise_local: bool = True
    #: standard deviation of the noise added to the identity mask at initialization
    mask_init_noise: float = 0.02
    disable_fft_residual_block: bool = False
    disable_fft_encoder: bool = False
    disable_concat_shortcut: bool = False
    disable_encoder_shortcut: bool = False

    def __post_init__(self) -> None:
        for name in _TUPLE_FIELDS:
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        for name, n in _TUPLE_LENGTHS.items():
            if len(getattr(self, name)) != n:
                raise ValueError(f"'{name}' needs {n} entries, got {getattr(self, name)}")
        if not is_power_of_two(self.input_size) or self.input_size < 32:
            raise ValueError(f"input_size must be a power of two >= 32, got {self.input_size}")
        positive = [self.in_channels, self.head_channels, self.output_dims, self.ffn_expansion,
                    self.irb_expansion, *self.stage_channels, *self.encoder_dims]
        if min(positive) < 1:
            raise ValueError("Channels, dimensions and expansion ratios must be strictly positive")
        if self.stage_blocks[0] < 0 or min(self.stage_blocks[1:]) < 1:
            raise ValueError(f"stage_blocks must be >= (0, 1, 1), got {self.stage_blocks}")
        if min(self.encoders_per_block) < 0:
            raise ValueError(f"encoders_per_block must be >= 0, got {self.encoders_per_block}")
        if self.mask_init_noise < 0:
            raise ValueError("mask_init_noise must be >= 0")

    @classmethod
    def small(cls, **overrides) -> "ModelConfig":
        """desk-scale model for 64x64 training runs"""
        kw = dict(input_size=64, stage_channels=(8, 12, 16, 24, 32), encoder_dims=(16, 24, 32),
                  encoders_per_block=(1, 1, 1), head_channels=64)
        kw.update(overrides)
        return cls(**kw)

    def with_ablation(self, *names: str) -> "ModelConfig":
        """a copy with the given ablation switches turned on"""
        for name in names:
            if name not in ABLATIONS:
                raise ValueError(f"Unknown ablation '{name}', expected one of {ABLATIONS}")
        return replace(self, **{name: True for name in names})

    @property
    def ablations(self) -> List[str]:
        return [name for name in ABLATIONS if getattr(self, name)]

    def feature_sizes(self) -> List[int]:
        """spatial sizes: stem output, stages 2 and 3 and the 4th and 5th stage"""
        return [self.input_size // 2 ** i for i in range(1, 6)]

    # --- INI representation ---

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser["model"] = {}
        parser["ablation"] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            section = "ablation" if f.name in ABLATIONS else "model"
            if f.name in _TUPLE_FIELDS:
                value = ", ".join(str(v) for v in value)
            parser[section][f.name] = str(value).lower() if isinstance(value, bool) else str(value)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, source: str = "<string>") -> "ModelConfig":
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text, source=source)
        except configparser.Error as e:
            raise ValueError(f"Cannot parse model configuration {source}: {e}") from None
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for section in parser.sections():
            if section not in ("model", "ablation"):
                raise ValueError(f"Unknown section [{section}] in {source}")
            for key in parser[section]:
                if key not in known or (key in ABLATIONS) != (section == "ablation"):
                    raise ValueError(f"Unknown key '{key}' in section [{section}] of {source}")
                if key in _TUPLE_FIELDS:
                    kwargs[key] = tuple(int(v) for v in parser[section][key].split(","))
                elif known[key].type in (bool, "bool"):
                    kwargs[key] = parser.getboolean(section, key)
                elif known[key].type in (float, "float"):
                    kwargs[key] = parser.getfloat(section, key)
                else:
                    kwargs[key] = parser.getint(section, key)
        return cls(**kwargs)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_ini())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModelConfig":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Model configuration '{path}' does not exist")
        return cls.from_ini(path.read_text(), source=str(path))


class FrNet(Module):
    """
    FR-Net: a convolutional stem and inverted residual stages, three FFT Residual
    Blocks interleaved with downsampling inverted residual blocks, a 1x1 convolution,
    global average pooling and a linear head producing [yaw, pitch] in radians.
    """

    def __init__(self, config: Optional[ModelConfig] = None, seed: int = 0) -> None:
        super().__init__()
        #: the architecture
        self.config = config = config or ModelConfig()
        #: the seed of the weight initialization
        self.seed = seed
        rng = np.random.default_rng(seed)
        c1, c2, c3, c4, c5 = config.stage_channels
        n1, n2, n3 = config.stage_blocks
        e = config.irb_expansion
        sizes = config.feature_sizes()

        def irb(cin, cout, stride=1):
            return InvertedResidualBlock(cin, cout, stride, e, rng)

        self.stem = self.add_module("stem", ConvNormAct(config.in_channels, c1, 3, 2, rng=rng))
        self.stage1 = self.add_module("stage1", Sequential(*[irb(c1, c1) for _ in range(n1)]))
        self.stage2 = self.add_module(
            "stage2", Sequential(irb(c1, c2, 2), *[irb(c2, c2) for _ in range(n2 - 1)]))
        self.stage3 = self.add_module(
            "stage3", Sequential(irb(c2, c3, 2), *[irb(c3, c3) for _ in range(n3 - 1)]))
        self.block1 = self.add_module("block1", self._residual_block(0, c3, sizes[2], rng))
        self.down4 = self.add_module("down4", irb(c3, c4, 2))
        self.block2 = self.add_module("block2", self._residual_block(1, c4, sizes[3], rng))
        self.down5 = self.add_module("down5", irb(c4, c5, 2))
        self.block3 = self.add_module("block3", self._residual_block(2, c5, sizes[4], rng))
        self.head_conv = self.add_module("head_conv", ConvNormAct(c5, config.head_channels, 1, rng=rng))
        self.pool = self.add_module("pool", GlobalAvgPool())
        self.head = self.add_module("head", Linear(config.head_channels, config.output_dims, rng))
        self.bind_names()

    def _residual_block(self, i: int, channels: int, size: int, rng: np.random.Generator) -> Module:
        config = self.config
        if config.disable_fft_residual_block:
            return InvertedResidualBlock(channels, channels, 1, config.irb_expansion, rng)
        return FFTResidualBlock(
            channels, config.encoder_dims[i], size, size, config.encoders_per_block[i],
            ffn_expansion=config.ffn_expansion,
            encoder_shortcut=not config.disable_encoder_shortcut,
            use_encoders=not config.disable_fft_encoder,
            concat_shortcut=not config.disable_concat_shortcut,
            depthwise_local=config.depthwise_local,
            mask_noise=config.mask_init_noise, rng=rng)

    @property
    def input_shape(self) -> Tuple[int, int, int]:
        return (self.config.in_channels, self.config.input_size, self.config.input_size)

    def forward(self, tape: Tape, x: int) -> int:
        for module in (self.stem, self.stage1, self.stage2, self.stage3, self.block1, self.down4,
                       self.block2, self.down5, self.block3, self.head_conv, self.pool, self.head):
            x = module(tape, x)
        return x

    def check_input(self, image: Tensor) -> None:
        if tuple(image.shape) != self.input_shape:
            raise ShapeError(f"Expected an input image of shape {list(self.input_shape)}, "
                             f"got {list(image.shape)}")

    def trace(self, image: Tensor) -> Tuple[Tape, int]:
        """record the forward pass of one image, returns the tape and the output node"""
        self.check_input(image)
        tape = Tape()
        return tape, self(tape, tape.constant(image))

    @profile
    def predict(self, image: Tensor) -> Tensor:
        """[yaw, pitch] in radians for a single [c,h,w] image"""
        tape, out = self.trace(image)
        return tape.value(out)
