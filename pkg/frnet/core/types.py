from typing import Sequence, Tuple, Union

import numpy as np
import numpy.typing

# common type for tensor shapes
Shape = Tuple[int, ...]

# anything that can be turned into a Shape
ShapeLike = Union[int, Sequence[int]]

# common type for dense real arrays, e.g. a tensor payload
Array = numpy.typing.NDArray[np.floating]

# dense complex arrays, e.g. a spectrum
ComplexArray = numpy.typing.NDArray[np.complexfloating]

# objects that can be coerced into an Array
ArrayLike = numpy.typing.ArrayLike
