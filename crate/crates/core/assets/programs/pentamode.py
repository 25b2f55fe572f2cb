from metagen import *

def make_structure(beamRadius_narrow=0.03, beamRadius_wide=0.1) -> Structure:
    embed = cuboid.embed(0.5, 0.5, 0.5, 
                    cornerAtAABBMin=cuboid.corners.FRONT_BOTTOM_LEFT)
    
    v0 = vertex(cuboid.corners.FRONT_BOTTOM_LEFT)
    v1 = vertex(cuboid.corners.BACK_TOP_RIGHT)
    p0 = Polyline([v0, v1])

    skel = skeleton([p0])
    liftedSkel = SpatiallyVaryingBeams(skel, [[0, beamRadius_narrow], 
                                              [0.5, beamRadius_wide],
                                              [1, beamRadius_narrow]])

    tile = Tile([liftedSkel], embed)
    pat = Custom(Rotate180([cuboid.edges.BACK_RIGHT, 
                            cuboid.edges.BACK_LEFT], True,
                        Rotate180([cuboid.edges.TOP_RIGHT], True)))
    obj = Structure(tile, pat)

    return obj
