# Grade computacional, campos periódicos e exceções do MeshKit
