import os

# corpus files are addressed relative to the repository root
os.chdir(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
