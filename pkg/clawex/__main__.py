# -*- coding: utf-8 -*-
from clawex.cli import main

if __name__ == "__main__":
    main()
