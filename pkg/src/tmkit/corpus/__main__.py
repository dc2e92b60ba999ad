from . import regenerate_goldens

for path in regenerate_goldens():
    print(path.name)
