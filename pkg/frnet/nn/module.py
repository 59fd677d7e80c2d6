from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..autodiff.tape import Parameter, Tape
from ..core.types import ArrayLike


class Module():
    """
    Base class of all layers and blocks. A module owns named parameters and named
    child modules, and records its forward computation on a Tape under its own
    name as scope. Custom layers implement forward(tape, x).
    """

    def __init__(self) -> None:
        #: the module's name within its parent ('' for the root)
        self.name = ""
        #: own parameters, by local name
        self._parameters: Dict[str, Parameter] = {}
        #: child modules, by local name
        self._modules: Dict[str, "Module"] = {}

    def add_parameter(self, name: str, value: ArrayLike, trainable: bool = True) -> Parameter:
        p = Parameter(name, value, trainable)
        self._parameters[name] = p
        return p

    def add_module(self, name: str, module: "Module") -> "Module":
        module.name = name
        self._modules[name] = module
        return module

    def children(self) -> List["Module"]:
        return list(self._modules.values())

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        """(qualified name, parameter) pairs in definition order, depth first"""
        for name, p in self._parameters.items():
            yield prefix + name, p
        for name, m in self._modules.items():
            yield from m.named_parameters(prefix + name + ".")

    def parameters(self, trainable_only: bool = True) -> List[Parameter]:
        return [p for _, p in self.named_parameters() if p.trainable or not trainable_only]

    def bind_names(self) -> None:
        """give every parameter its qualified name"""
        for name, p in self.named_parameters():
            p.name = name

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, tape: Tape, x: int) -> int:
        raise NotImplementedError("No forward computation defined for this module!")

    def __call__(self, tape: Tape, x: int) -> int:
        with tape.scope(self.name):
            return self.forward(tape, x)

    def save(self) -> dict:
        """the parameter values by qualified name"""
        return {name: p.value.data for name, p in self.named_parameters()}

    def load(self, data: dict) -> None:
        """restore the parameter values from a dict created by save()"""
        for name, p in self.named_parameters():
            p.assign(data[name])

    def zero_weights(self) -> None:
        """set every parameter to zero"""
        for p in self.parameters(trainable_only=False):
            p.assign(np.zeros(p.shape, dtype=p.value.dtype))

    def __repr__(self) -> str:
        """pretty-print the module tree"""
        own = ", ".join(f"{n}{list(p.shape)}" for n, p in self._parameters.items())
        res = f"{self.name or 'root'}: {type(self).__name__}" + (f" ({own})" if own else "")
        children = self.children()
        for i, m in enumerate(children):
            child_repr = repr(m)
            if i < len(children) - 1:
                res += "\n ├─" + child_repr.replace("\n", "\n │ ")
            else:
                res += "\n └─" + child_repr.replace("\n", "\n   ")
        return res


class Sequential(Module):
    """Modules applied one after the other, named '0', '1', ..."""

    def __init__(self, *modules: Module) -> None:
        super().__init__()
        for i, m in enumerate(modules):
            self.add_module(str(i), m)

    def __len__(self) -> int:
        return len(self._modules)

    def __getitem__(self, i: int) -> Module:
        return self.children()[i]

    def forward(self, tape: Tape, x: int) -> int:
        for m in self.children():
            x = m(tape, x)
        return x


def default_rng(rng: Optional[np.random.Generator]) -> np.random.Generator:
    return np.random.default_rng(0) if rng is None else rng
