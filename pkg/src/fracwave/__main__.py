"""python -m fracwave"""

from .cli import main

main()
